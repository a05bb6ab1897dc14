//! One simulated run: selection, collision resolution, pseudo-regret.
//!
//! At each step every player selects, arms chosen by exactly one player pay
//! their true mean to the group, and every player then observes one reward
//! sample of the arm it chose whether or not it collided. Players that
//! share an arm see the same sample.

use std::sync::Arc;

use crate::env::{EnvConfig, MeanTimeline};
use crate::metrics::MisidentCounters;
use crate::policies::{build_policy, Policy, PolicyConfig, PolicyKind, TieBreak};
use crate::seeding::stream_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceRetention {
    /// Keep a [`StepOutcome`] for every step.
    Full,
    #[default]
    LedgerOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub kind: PolicyKind,
    pub lambda: f64,
    /// Seeds the reward stream and the players' tie-break streams.
    pub seed: u64,
    pub tie_break: TieBreak,
    pub retention: TraceRetention,
}

impl RunSettings {
    pub fn new(kind: PolicyKind, lambda: f64, seed: u64) -> Self {
        RunSettings {
            kind,
            lambda,
            seed,
            tie_break: TieBreak::LowestIndex,
            retention: TraceRetention::LedgerOnly,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.retention = TraceRetention::Full;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub t: usize,
    /// `selections[j]` is player `j`'s arm.
    pub selections: Vec<usize>,
    /// `(arm, player)` pairs where the player was the arm's only selector.
    pub sole_selectors: Vec<(usize, usize)>,
    pub group_reward: f64,
    pub oracle_reward: f64,
    pub inst_regret: f64,
    /// Each player's estimated top-`M` set in force at `t`, when the policy keeps one.
    pub estimated_sets: Option<Vec<Vec<usize>>>,
    /// Oldest observation in each player's window when deciding at `t`.
    pub window_starts: Vec<Option<usize>>,
}

/// Per-step series (index `t - 1`) and end-of-run totals.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    pub cumulative_regret: Vec<f64>,
    /// Cumulative number of player-steps lost to collisions.
    pub collisions: Vec<u64>,
    /// Cumulative misidentification count of the worst player: `N_k` for
    /// policies with a top-`M` estimate, otherwise the rank count `N̂_k`.
    pub misid_max: Vec<u64>,
    /// Cumulative steps at which the players' top-`M` estimates differed.
    pub disagreements: Vec<u64>,
    /// Total pseudo-reward credited to each player.
    pub player_rewards: Vec<f64>,
    pub counters: MisidentCounters,
}

impl RegretLedger {
    pub fn horizon(&self) -> usize {
        self.cumulative_regret.len()
    }

    /// `R(t)` for 1-based `t`.
    pub fn regret_at(&self, t: usize) -> f64 {
        self.cumulative_regret[t - 1]
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub ledger: RegretLedger,
    pub trace: Option<Vec<StepOutcome>>,
}

/// Arms of the `m` largest means (ascending arm order) and their mean sum,
/// summed in ascending arm order.
pub fn top_arms(means: &[f64], m: usize) -> (Vec<usize>, f64) {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order.truncate(m);
    order.sort_unstable();
    let sum = order.iter().map(|&a| means[a]).sum();
    (order, sum)
}

/// The true top-`m` set at `t` and the oracle reward.
pub fn oracle_top_m(timeline: &MeanTimeline, t: usize, m: usize) -> Result<(Vec<usize>, f64)> {
    Ok(top_arms(timeline.means_at(t)?, m))
}

/// Arms ranked by true mean at `t`; `theta[k]` is the rank-`k` arm (0-based).
pub fn rank_order(means: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}

/// `(arm, player)` pairs for players that are alone on their arm, ordered by arm.
pub fn resolve_collisions(selections: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(selections.len());
    for (j, &arm) in selections.iter().enumerate() {
        let shared = selections
            .iter()
            .enumerate()
            .any(|(other, &a)| other != j && a == arm);
        if !shared {
            pairs.push((arm, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

fn check_shapes(env: &EnvConfig, timeline: &MeanTimeline, num_policies: usize) -> Result<()> {
    env.validate()?;
    let mut v = Vec::new();
    if timeline.horizon() != env.horizon {
        v.push(format!(
            "timeline horizon {} differs from T={}",
            timeline.horizon(),
            env.horizon
        ));
    }
    if timeline.num_arms() != env.num_arms {
        v.push(format!(
            "timeline has {} arms, N={}",
            timeline.num_arms(),
            env.num_arms
        ));
    }
    if num_policies != env.num_players {
        v.push(format!(
            "{num_policies} policies for M={} players",
            env.num_players
        ));
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(v))
    }
}

/// Runs `settings.kind` for every player on `timeline`.
pub fn run_episode(
    env: &EnvConfig,
    timeline: &Arc<MeanTimeline>,
    settings: &RunSettings,
) -> Result<Episode> {
    let policies = (0..env.num_players)
        .map(|player| {
            let cfg = PolicyConfig {
                kind: settings.kind,
                player,
                num_arms: env.num_arms,
                num_players: env.num_players,
                nu: env.nu,
                lambda: settings.lambda,
                horizon: env.horizon,
                tie_break: settings.tie_break,
            };
            build_policy(
                &cfg,
                timeline,
                stream_rng(settings.seed, "ties", player as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    run_with_policies(env, timeline, policies, settings.seed, settings.retention)
}

/// Runs arbitrary per-player policies; `seed` drives the reward stream.
pub fn run_with_policies(
    env: &EnvConfig,
    timeline: &MeanTimeline,
    mut policies: Vec<Box<dyn Policy>>,
    seed: u64,
    retention: TraceRetention,
) -> Result<Episode> {
    check_shapes(env, timeline, policies.len())?;
    let horizon = env.horizon;
    let m = env.num_players;
    let mut reward_rng = stream_rng(seed, "rewards", 0);

    let mut cumulative_regret = Vec::with_capacity(horizon);
    let mut collisions = Vec::with_capacity(horizon);
    let mut misid_max = Vec::with_capacity(horizon);
    let mut disagreements = Vec::with_capacity(horizon);
    let mut player_rewards = vec![0.0; m];
    let mut rank_misid = vec![0u64; m];
    let mut set_misid = vec![0u64; m];
    let mut disagree_total = 0u64;
    let mut collision_total = 0u64;
    let mut regret = 0.0f64;
    let mut trace = (retention == TraceRetention::Full).then(|| Vec::with_capacity(horizon));
    let tracks_sets = policies.iter().all(|p| p.estimated_top_set().is_some());

    let mut selections = vec![0usize; m];
    let mut sampled: Vec<Option<f64>> = vec![None; env.num_arms];

    for (seg_index, segment) in timeline.segments().iter().enumerate() {
        let means = &segment.means;
        let (oracle_set, oracle_reward) = top_arms(means, m);
        let theta = rank_order(means);
        debug_assert_eq!(seg_index == 0, segment.start == 1);

        for t in segment.start..=segment.end {
            let window_starts: Vec<Option<usize>> = if trace.is_some() {
                policies
                    .iter()
                    .map(|p| p.window().and_then(|w| w.oldest_time()))
                    .collect()
            } else {
                Vec::new()
            };
            for (j, p) in policies.iter_mut().enumerate() {
                let arm = p.select(t);
                if arm >= env.num_arms {
                    return Err(Error::ArmOutOfRange {
                        arm,
                        num_arms: env.num_arms,
                    });
                }
                selections[j] = arm;
            }

            let sole = resolve_collisions(&selections);
            // Ascending arm order, same as the oracle sum: a perfect
            // selection cancels to exactly zero.
            let group_reward: f64 = sole.iter().map(|&(arm, _)| means[arm]).sum();
            let inst_regret = (oracle_reward - group_reward).max(0.0);
            regret += inst_regret;
            collision_total += (m - sole.len()) as u64;
            for &(arm, j) in &sole {
                player_rewards[j] += means[arm];
            }

            for j in 0..m {
                if selections[j] != theta[j] {
                    rank_misid[j] += 1;
                }
            }
            let estimated_sets = if tracks_sets {
                let sets: Vec<&[usize]> = policies
                    .iter()
                    .map(|p| p.estimated_top_set().unwrap_or(&[]))
                    .collect();
                for (j, s) in sets.iter().enumerate() {
                    if *s != oracle_set.as_slice() {
                        set_misid[j] += 1;
                    }
                }
                if sets.windows(2).any(|w| w[0] != w[1]) {
                    disagree_total += 1;
                }
                trace
                    .is_some()
                    .then(|| sets.iter().map(|s| s.to_vec()).collect::<Vec<_>>())
            } else {
                None
            };

            cumulative_regret.push(regret);
            collisions.push(collision_total);
            let worst = if tracks_sets { &set_misid } else { &rank_misid };
            misid_max.push(worst.iter().copied().max().unwrap_or(0));
            disagreements.push(disagree_total);

            if let Some(trace) = trace.as_mut() {
                trace.push(StepOutcome {
                    t,
                    selections: selections.clone(),
                    sole_selectors: sole,
                    group_reward,
                    oracle_reward,
                    inst_regret,
                    estimated_sets,
                    window_starts,
                });
            }

            for &arm in &selections {
                if sampled[arm].is_none() {
                    sampled[arm] = Some(env.reward_model.sample(means[arm], &mut reward_rng));
                }
            }
            for (j, p) in policies.iter_mut().enumerate() {
                let arm = selections[j];
                p.observe(t, arm, sampled[arm].expect("sampled above"))?;
            }
            for &arm in &selections {
                sampled[arm] = None;
            }
        }
    }

    Ok(Episode {
        ledger: RegretLedger {
            cumulative_regret,
            collisions,
            misid_max,
            disagreements,
            player_rewards,
            counters: MisidentCounters {
                set_misid: tracks_sets.then_some(set_misid),
                rank_misid,
                disagreements: disagree_total,
            },
        },
        trace,
    })
}
