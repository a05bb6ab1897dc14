use super::ranking::{argmax, argmin_among, init_select, top_m};
use super::{Policy, Ties};
use crate::window::WindowStats;
use crate::Result;

fn fill_ucb(stats: &WindowStats, t: usize, out: &mut [f64]) {
    for (arm, v) in out.iter_mut().enumerate() {
        *v = match stats.windowed_mean(arm) {
            Some(m) => m + stats.confidence_radius(arm, t),
            None => f64::INFINITY,
        };
    }
}

fn fill_lcb(stats: &WindowStats, t: usize, out: &mut [f64]) {
    for (arm, v) in out.iter_mut().enumerate() {
        *v = match stats.windowed_mean(arm) {
            Some(m) => m - stats.confidence_radius(arm, t),
            None => f64::NEG_INFINITY,
        };
    }
}

/// The `m` arms with the largest windowed UCB index for a decision at `t`,
/// in ascending arm order, ties to the lower arm.
pub fn top_m_by_ucb(stats: &WindowStats, t: usize, m: usize) -> Vec<usize> {
    let mut ucb = vec![0.0; stats.num_arms()];
    fill_ucb(stats, t, &mut ucb);
    top_m(&ucb, m, &super::ranking::lowest_index(stats.num_arms()))
}

/// Single-player sliding-window UCB (SW-UCB#).
#[derive(Debug, Clone)]
pub struct SwUcbSharp {
    player: usize,
    stats: WindowStats,
    ucb: Vec<f64>,
    ties: Ties,
}

impl SwUcbSharp {
    pub fn new(player: usize, stats: WindowStats) -> Self {
        let n = stats.num_arms();
        Self::with_ties(player, stats, Ties::lowest_index(n))
    }

    pub(crate) fn with_ties(player: usize, stats: WindowStats, ties: Ties) -> Self {
        SwUcbSharp {
            player,
            ucb: vec![0.0; stats.num_arms()],
            stats,
            ties,
        }
    }
}

impl Policy for SwUcbSharp {
    fn select(&mut self, t: usize) -> usize {
        let n = self.stats.num_arms();
        if t <= n {
            return init_select(t, self.player, n).expect("t within initialization");
        }
        fill_ucb(&self.stats, t, &mut self.ucb);
        argmax(&self.ucb, self.ties.next())
    }

    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        self.stats.record(t, arm, reward)
    }

    fn window(&self) -> Option<&WindowStats> {
        Some(&self.stats)
    }
}

/// Round-robin sliding-window UCB (RR-SW-UCB#).
///
/// At `t = N + eta*M + 1` the player recomputes its top-`M` set, sorts it by
/// arm index, and then takes `G[(t - N + k - 2) mod M]` (1-based `k`). A
/// final partial phase is simply cut off at the horizon.
#[derive(Debug, Clone)]
pub struct RrSwUcbSharp {
    player: usize,
    num_players: usize,
    stats: WindowStats,
    omega: Vec<usize>,
    last_recompute: Option<usize>,
    ucb: Vec<f64>,
    ties: Ties,
}

impl RrSwUcbSharp {
    pub fn new(player: usize, num_players: usize, stats: WindowStats) -> Self {
        let n = stats.num_arms();
        Self::with_ties(player, num_players, stats, Ties::lowest_index(n))
    }

    pub(crate) fn with_ties(
        player: usize,
        num_players: usize,
        stats: WindowStats,
        ties: Ties,
    ) -> Self {
        RrSwUcbSharp {
            player,
            num_players,
            omega: Vec::with_capacity(num_players),
            last_recompute: None,
            ucb: vec![0.0; stats.num_arms()],
            stats,
            ties,
        }
    }

    /// Whether `t` opens a round-robin phase.
    pub fn is_recompute_time(t: usize, num_arms: usize, num_players: usize) -> bool {
        t > num_arms && (t - num_arms - 1).is_multiple_of(num_players)
    }

    pub fn last_recompute(&self) -> Option<usize> {
        self.last_recompute
    }

    /// The sorted set `G` in use (empty during initialization).
    pub fn round_robin_set(&self) -> &[usize] {
        &self.omega
    }
}

impl Policy for RrSwUcbSharp {
    fn select(&mut self, t: usize) -> usize {
        let n = self.stats.num_arms();
        if t <= n {
            return init_select(t, self.player, n).expect("t within initialization");
        }
        // Also catches a first call past a phase start.
        if Self::is_recompute_time(t, n, self.num_players) || self.omega.is_empty() {
            fill_ucb(&self.stats, t, &mut self.ucb);
            self.omega = top_m(&self.ucb, self.num_players, self.ties.next());
            self.last_recompute = Some(t);
        }
        self.omega[(t - n + self.player - 1) % self.num_players]
    }

    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        self.stats.record(t, arm, reward)
    }

    fn estimated_top_set(&self) -> Option<&[usize]> {
        Some(&self.omega)
    }

    fn window(&self) -> Option<&WindowStats> {
        Some(&self.stats)
    }
}

/// Sliding-window distributed learning with prioritization (SW-DLP).
///
/// Each step player `k` takes its `k` best arms by UCB and pulls the one
/// with the smallest LCB among them.
#[derive(Debug, Clone)]
pub struct SwDlp {
    player: usize,
    stats: WindowStats,
    a_set: Vec<usize>,
    ucb: Vec<f64>,
    lcb: Vec<f64>,
    ties: Ties,
}

impl SwDlp {
    pub fn new(player: usize, stats: WindowStats) -> Self {
        let n = stats.num_arms();
        Self::with_ties(player, stats, Ties::lowest_index(n))
    }

    pub(crate) fn with_ties(player: usize, stats: WindowStats, ties: Ties) -> Self {
        let n = stats.num_arms();
        SwDlp {
            player,
            a_set: Vec::with_capacity(player + 1),
            ucb: vec![0.0; n],
            lcb: vec![0.0; n],
            stats,
            ties,
        }
    }

    /// `A_k` from the latest decision, ascending.
    pub fn prioritized_set(&self) -> &[usize] {
        &self.a_set
    }
}

impl Policy for SwDlp {
    fn select(&mut self, t: usize) -> usize {
        let n = self.stats.num_arms();
        if t <= n {
            return init_select(t, self.player, n).expect("t within initialization");
        }
        fill_ucb(&self.stats, t, &mut self.ucb);
        fill_lcb(&self.stats, t, &mut self.lcb);
        let priority = self.ties.next();
        self.a_set = top_m(&self.ucb, self.player + 1, priority);
        argmin_among(&self.a_set, &self.lcb, priority)
    }

    fn observe(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        self.stats.record(t, arm, reward)
    }

    fn window(&self) -> Option<&WindowStats> {
        Some(&self.stats)
    }
}
