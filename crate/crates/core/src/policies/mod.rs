//! Arm-selection policies.
//!
//! Every learner sees only its own `(arm, reward)` history through
//! [`Policy::observe`]; nothing about collisions or other players reaches
//! it. The first `N` steps of every learner follow the staggered
//! initialization of [`ranking::init_select`], after which:
//!
//! | kind              | statistics   | rule                                            |
//! |-------------------|--------------|-------------------------------------------------|
//! | `ucb`             | full history | argmax of `mean + sqrt(2 ln t / n)`             |
//! | `dlp`             | full history | argmin LCB over the player's top-`k` UCB arms   |
//! | `sw-ucb-sharp`    | window       | argmax of `mean + sqrt((1 + alpha) ln t / n)`   |
//! | `rr-sw-ucb-sharp` | window       | round robin over the top-`M` set, refreshed every `M` steps |
//! | `sw-dlp`          | window       | argmin LCB over the player's top-`k` UCB arms   |
//!
//! `k` is the player's 1-based priority (`player + 1`). The windowed kinds
//! use `alpha = (1 - nu) / 2`.

mod baseline;
pub mod ranking;
mod sliding;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;

pub use baseline::{Dlp, FixedArm, Oracle, Ucb};
pub use sliding::{top_m_by_ucb, RrSwUcbSharp, SwDlp, SwUcbSharp};

use crate::env::MeanTimeline;
use crate::seeding::SimRng;
use crate::window::WindowStats;
use crate::{Error, Result};

/// Per-player decision contract.
pub trait Policy: Send {
    /// Arm to pull at time `t` (1-based, strictly sequential).
    fn select(&mut self, t: usize) -> usize;

    /// Reward realized by the arm selected at `t`.
    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()>;

    /// Current estimate of the top-`M` set, for policies that maintain one.
    /// Empty before the first estimate.
    fn estimated_top_set(&self) -> Option<&[usize]> {
        None
    }

    fn window(&self) -> Option<&WindowStats> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Ucb,
    Dlp,
    SwUcbSharp,
    RrSwUcbSharp,
    SwDlp,
    /// Reference policy that reads the true means; player `k` takes the
    /// rank-`k` arm.
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Ucb,
        PolicyKind::Dlp,
        PolicyKind::SwUcbSharp,
        PolicyKind::RrSwUcbSharp,
        PolicyKind::SwDlp,
        PolicyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ucb => "ucb",
            PolicyKind::Dlp => "dlp",
            PolicyKind::SwUcbSharp => "sw-ucb-sharp",
            PolicyKind::RrSwUcbSharp => "rr-sw-ucb-sharp",
            PolicyKind::SwDlp => "sw-dlp",
            PolicyKind::Oracle => "oracle",
        }
    }

    pub fn is_windowed(self) -> bool {
        matches!(
            self,
            PolicyKind::SwUcbSharp | PolicyKind::RrSwUcbSharp | PolicyKind::SwDlp
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PolicyKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown algorithm `{s}` (expected one of {})",
                    names.join("|")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Fresh uniformly random priority order at every decision.
    Random,
}

/// Tie-break priority handed to the ranking helpers.
#[derive(Debug, Clone)]
pub(crate) struct Ties {
    priority: Vec<usize>,
    rng: Option<SimRng>,
}

impl Ties {
    pub(crate) fn new(num_arms: usize, rule: TieBreak, rng: SimRng) -> Self {
        Ties {
            priority: ranking::lowest_index(num_arms),
            rng: (rule == TieBreak::Random).then_some(rng),
        }
    }

    pub(crate) fn lowest_index(num_arms: usize) -> Self {
        Ties {
            priority: ranking::lowest_index(num_arms),
            rng: None,
        }
    }

    pub(crate) fn next(&mut self) -> &[usize] {
        if let Some(rng) = self.rng.as_mut() {
            self.priority.shuffle(rng);
        }
        &self.priority
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// 0-based player index; the player's priority is `player + 1`.
    pub player: usize,
    pub num_arms: usize,
    pub num_players: usize,
    pub nu: f64,
    pub lambda: f64,
    pub horizon: usize,
    pub tie_break: TieBreak,
}

impl PolicyConfig {
    /// Window exponent `(1 - nu) / 2`.
    pub fn alpha(&self) -> f64 {
        (1.0 - self.nu) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.num_players == 0 || self.num_players > self.num_arms {
            v.push(format!(
                "M must be ≤ N (M={}, N={})",
                self.num_players, self.num_arms
            ));
        }
        if self.player >= self.num_players {
            v.push(format!(
                "player {} outside 0..{}",
                self.player, self.num_players
            ));
        }
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            v.push(format!("nu must lie in [0,1) (got {})", self.nu));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            v.push(format!("lambda must be > 0 (got {})", self.lambda));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Builds one player's policy. `timeline` is read only by [`PolicyKind::Oracle`].
pub fn build_policy(
    cfg: &PolicyConfig,
    timeline: &Arc<MeanTimeline>,
    tie_rng: SimRng,
) -> Result<Box<dyn Policy>> {
    cfg.validate()?;
    let ties = Ties::new(cfg.num_arms, cfg.tie_break, tie_rng);
    let window = || WindowStats::with_horizon(cfg.num_arms, cfg.alpha(), cfg.lambda, cfg.horizon);
    Ok(match cfg.kind {
        PolicyKind::Ucb => Box::new(Ucb::with_ties(cfg.player, cfg.num_arms, ties)),
        PolicyKind::Dlp => Box::new(Dlp::with_ties(cfg.player, cfg.num_arms, ties)),
        PolicyKind::SwUcbSharp => Box::new(SwUcbSharp::with_ties(cfg.player, window(), ties)),
        PolicyKind::RrSwUcbSharp => Box::new(RrSwUcbSharp::with_ties(
            cfg.player,
            cfg.num_players,
            window(),
            ties,
        )),
        PolicyKind::SwDlp => Box::new(SwDlp::with_ties(cfg.player, window(), ties)),
        PolicyKind::Oracle => Box::new(Oracle::new(cfg.player, Arc::clone(timeline))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("thompson".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn alpha_follows_nu() {
        let cfg = PolicyConfig {
            kind: PolicyKind::SwDlp,
            player: 0,
            num_arms: 6,
            num_players: 3,
            nu: 0.3,
            lambda: 12.3,
            horizon: 100,
            tie_break: TieBreak::LowestIndex,
        };
        assert!((cfg.alpha() - 0.35).abs() < 1e-15);
        assert!(cfg.validate().is_ok());
        let bad = PolicyConfig {
            player: 3,
            lambda: 0.0,
            ..cfg
        };
        match bad.validate() {
            Err(Error::InvalidConfig(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
