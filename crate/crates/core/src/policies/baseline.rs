use std::sync::Arc;

use super::ranking::{argmax, argmin_among, init_select, top_m};
use super::{Policy, Ties};
use crate::env::MeanTimeline;
use crate::window::HistoryStats;
use crate::Result;

fn fill_indices(stats: &HistoryStats, t: usize, ucb: &mut [f64], lcb: Option<&mut [f64]>) {
    for (arm, v) in ucb.iter_mut().enumerate() {
        *v = match stats.mean(arm) {
            Some(m) => m + stats.confidence_radius(arm, t),
            None => f64::INFINITY,
        };
    }
    if let Some(lcb) = lcb {
        for (arm, v) in lcb.iter_mut().enumerate() {
            *v = match stats.mean(arm) {
                Some(m) => m - stats.confidence_radius(arm, t),
                None => f64::NEG_INFINITY,
            };
        }
    }
}

/// Classic UCB over the full history.
#[derive(Debug, Clone)]
pub struct Ucb {
    player: usize,
    stats: HistoryStats,
    ucb: Vec<f64>,
    ties: Ties,
}

impl Ucb {
    pub fn new(player: usize, num_arms: usize) -> Self {
        Self::with_ties(player, num_arms, Ties::lowest_index(num_arms))
    }

    pub(crate) fn with_ties(player: usize, num_arms: usize, ties: Ties) -> Self {
        Ucb {
            player,
            stats: HistoryStats::new(num_arms),
            ucb: vec![0.0; num_arms],
            ties,
        }
    }

    pub fn stats(&self) -> &HistoryStats {
        &self.stats
    }
}

impl Policy for Ucb {
    fn select(&mut self, t: usize) -> usize {
        let n = self.stats.num_arms();
        if t <= n {
            return init_select(t, self.player, n).expect("t within initialization");
        }
        fill_indices(&self.stats, t, &mut self.ucb, None);
        argmax(&self.ucb, self.ties.next())
    }

    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        self.stats.record(t, arm, reward)
    }
}

/// Distributed learning with prioritization: SL(k) over the full history.
#[derive(Debug, Clone)]
pub struct Dlp {
    player: usize,
    stats: HistoryStats,
    ucb: Vec<f64>,
    lcb: Vec<f64>,
    ties: Ties,
}

impl Dlp {
    pub fn new(player: usize, num_arms: usize) -> Self {
        Self::with_ties(player, num_arms, Ties::lowest_index(num_arms))
    }

    pub(crate) fn with_ties(player: usize, num_arms: usize, ties: Ties) -> Self {
        Dlp {
            player,
            stats: HistoryStats::new(num_arms),
            ucb: vec![0.0; num_arms],
            lcb: vec![0.0; num_arms],
            ties,
        }
    }
}

impl Policy for Dlp {
    fn select(&mut self, t: usize) -> usize {
        let n = self.stats.num_arms();
        if t <= n {
            return init_select(t, self.player, n).expect("t within initialization");
        }
        fill_indices(&self.stats, t, &mut self.ucb, Some(&mut self.lcb));
        let priority = self.ties.next();
        let a_set = top_m(&self.ucb, self.player + 1, priority);
        argmin_among(&a_set, &self.lcb, priority)
    }

    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        self.stats.record(t, arm, reward)
    }
}

/// Perfect-information reference: player `k` takes the rank-`k` arm.
#[derive(Debug, Clone)]
pub struct Oracle {
    player: usize,
    timeline: Arc<MeanTimeline>,
    order: Vec<usize>,
}

impl Oracle {
    pub fn new(player: usize, timeline: Arc<MeanTimeline>) -> Self {
        let order = (0..timeline.num_arms()).collect();
        Oracle {
            player,
            timeline,
            order,
        }
    }
}

impl Policy for Oracle {
    fn select(&mut self, t: usize) -> usize {
        let means = self.timeline.means_at(t).expect("t within horizon");
        self.order
            .sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
        self.order[self.player]
    }

    fn observe(&mut self, _t: usize, _arm: usize, _reward: f64) -> Result<()> {
        Ok(())
    }
}

/// Always pulls the same arm.
#[derive(Debug, Clone, Copy)]
pub struct FixedArm(pub usize);

impl Policy for FixedArm {
    fn select(&mut self, _t: usize) -> usize {
        self.0
    }

    fn observe(&mut self, _t: usize, _arm: usize, _reward: f64) -> Result<()> {
        Ok(())
    }
}
