//! Per-player arm statistics.
//!
//! [`WindowStats`] keeps counts and reward sums over the last `tau(t, alpha)`
//! steps; [`HistoryStats`] keeps them over the whole history. Rewards are
//! accumulated in 64-bit fixed point (`floor(r * 2^64)` held in a `u128`),
//! so adding and later evicting an observation restores the sum exactly and
//! the incremental statistics never drift from a recount.

use std::collections::VecDeque;

use crate::{Error, Result};

const FIXED_SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// Fixed-point image of a reward in `[0, 1]`.
pub fn to_fixed(reward: f64) -> u128 {
    debug_assert!(
        (0.0..=1.0).contains(&reward),
        "reward {reward} outside [0,1]"
    );
    (reward.clamp(0.0, 1.0) * FIXED_SCALE) as u128
}

/// Mean of `count` fixed-point rewards summing to `sum`.
pub fn fixed_mean(sum: u128, count: u64) -> f64 {
    sum as f64 / FIXED_SCALE / count as f64
}

/// `tau(t, alpha) = min(ceil(lambda * t^alpha), t)`.
pub fn window_width(t: usize, alpha: f64, lambda: f64) -> usize {
    let w = (lambda * (t as f64).powf(alpha)).ceil();
    if w >= t as f64 {
        t
    } else {
        (w as usize).max(1)
    }
}

/// Radius `sqrt(scale * ln t / n)`; infinite for an unplayed arm.
pub fn radius(scale: f64, t: usize, n: u64) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        (scale * (t as f64).ln() / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Tally {
    counts: Vec<u64>,
    sums: Vec<u128>,
}

impl Tally {
    fn new(num_arms: usize) -> Self {
        Tally {
            counts: vec![0; num_arms],
            sums: vec![0; num_arms],
        }
    }

    fn mean(&self, arm: usize) -> Option<f64> {
        match self.counts[arm] {
            0 => None,
            n => Some(fixed_mean(self.sums[arm], n)),
        }
    }
}

/// One entry of a player's observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub t: usize,
    pub arm: usize,
    pub reward: u128,
}

/// Sliding-window statistics for one player.
///
/// After `record(t, ..)` the window covers `{t - tau(t) + 1, ..., t}`, which
/// is exactly what the decision at `t + 1` consults.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    alpha: f64,
    lambda: f64,
    t: usize,
    history: VecDeque<Observation>,
    tally: Tally,
}

impl WindowStats {
    pub fn new(num_arms: usize, alpha: f64, lambda: f64) -> Self {
        WindowStats {
            alpha,
            lambda,
            t: 0,
            history: VecDeque::new(),
            tally: Tally::new(num_arms),
        }
    }

    /// Preallocates the FIFO for a known horizon.
    pub fn with_horizon(num_arms: usize, alpha: f64, lambda: f64, horizon: usize) -> Self {
        let mut s = Self::new(num_arms, alpha, lambda);
        s.history
            .reserve(window_width(horizon.max(1), alpha, lambda) + 1);
        s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_arms(&self) -> usize {
        self.tally.counts.len()
    }

    /// Time of the last recorded observation (0 before any).
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn record(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        if t != self.t + 1 {
            return Err(Error::NonSequential {
                expected: self.t + 1,
                got: t,
            });
        }
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        let fixed = to_fixed(reward);
        self.t = t;
        self.history.push_back(Observation {
            t,
            arm,
            reward: fixed,
        });
        self.tally.counts[arm] += 1;
        self.tally.sums[arm] += fixed;

        let width = window_width(t, self.alpha, self.lambda);
        while let Some(front) = self.history.front() {
            if front.t + width > t {
                break;
            }
            self.tally.counts[front.arm] -= 1;
            self.tally.sums[front.arm] -= front.reward;
            self.history.pop_front();
        }
        Ok(())
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.tally.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.tally.counts
    }

    /// Fixed-point reward sums, see [`to_fixed`].
    pub fn sums(&self) -> &[u128] {
        &self.tally.sums
    }

    /// `None` when the arm has no observation inside the window.
    pub fn windowed_mean(&self, arm: usize) -> Option<f64> {
        self.tally.mean(arm)
    }

    /// `sqrt((1 + alpha) ln t / n_arm)` for a decision at time `t`.
    pub fn confidence_radius(&self, arm: usize, t: usize) -> f64 {
        radius(1.0 + self.alpha, t, self.count(arm))
    }

    pub fn observations(&self) -> impl ExactSizeIterator<Item = &Observation> {
        self.history.iter()
    }

    /// Oldest observation time still in the window.
    pub fn oldest_time(&self) -> Option<usize> {
        self.history.front().map(|o| o.t)
    }
}

/// Full-history statistics used by the stationary baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryStats {
    t: usize,
    tally: Tally,
}

impl HistoryStats {
    pub fn new(num_arms: usize) -> Self {
        HistoryStats {
            t: 0,
            tally: Tally::new(num_arms),
        }
    }

    pub fn num_arms(&self) -> usize {
        self.tally.counts.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn record(&mut self, t: usize, arm: usize, reward: f64) -> Result<()> {
        if t != self.t + 1 {
            return Err(Error::NonSequential {
                expected: self.t + 1,
                got: t,
            });
        }
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        self.t = t;
        self.tally.counts[arm] += 1;
        self.tally.sums[arm] += to_fixed(reward);
        Ok(())
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.tally.counts[arm]
    }

    pub fn mean(&self, arm: usize) -> Option<f64> {
        self.tally.mean(arm)
    }

    /// `sqrt(2 ln t / n_arm)`.
    pub fn confidence_radius(&self, arm: usize, t: usize) -> f64 {
        radius(2.0, t, self.count(arm))
    }
}
