//! Abruptly-changing environments.
//!
//! Breakpoints fall where `floor(t^nu)` increments, so the number of
//! breakpoints up to `t` is `floor(t^nu) - 1`. At `t = 1` and at every
//! breakpoint the N arm means are redrawn from a pool without replacement.
//! New means apply from the breakpoint itself onward.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::seeding::stream_rng;
use crate::{Error, Result};

/// Mean pool used by the reference experiments.
pub const DEFAULT_MEAN_POOL: [f64; 6] = [0.05, 0.22, 0.39, 0.56, 0.73, 0.90];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RewardModel {
    #[default]
    Bernoulli,
    /// `Normal(mu, sigma^2)` clamped to `[0, 1]`. `sigma = 0` gives deterministic rewards.
    TruncatedGaussian {
        sigma: f64,
    },
}

impl RewardModel {
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            RewardModel::Bernoulli => {
                if rng.random_bool(mean) {
                    1.0
                } else {
                    0.0
                }
            }
            RewardModel::TruncatedGaussian { sigma } => {
                if sigma == 0.0 {
                    return mean;
                }
                let normal = Normal::new(mean, sigma).expect("sigma validated as finite and >= 0");
                normal.sample(rng).clamp(0.0, 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub num_arms: usize,
    pub num_players: usize,
    pub horizon: usize,
    pub nu: f64,
    pub mean_pool: Vec<f64>,
    pub reward_model: RewardModel,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            num_arms: 6,
            num_players: 3,
            horizon: 100_000,
            nu: 0.3,
            mean_pool: DEFAULT_MEAN_POOL.to_vec(),
            reward_model: RewardModel::Bernoulli,
            seed: 0,
        }
    }
}

impl EnvConfig {
    /// Collects every violated constraint instead of stopping at the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.num_arms == 0 {
            v.push("N must be >= 1".to_string());
        }
        if self.num_players == 0 {
            v.push("M must be >= 1".to_string());
        }
        if self.num_players > self.num_arms {
            v.push(format!(
                "M must be ≤ N (M={}, N={})",
                self.num_players, self.num_arms
            ));
        }
        if self.horizon == 0 {
            v.push("T must be >= 1".to_string());
        }
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            v.push(format!("nu must lie in [0,1) (got {})", self.nu));
        }
        if self.mean_pool.len() < self.num_arms {
            v.push(format!(
                "mean pool has {} values but N={} distinct means are needed",
                self.mean_pool.len(),
                self.num_arms
            ));
        }
        if self.mean_pool.iter().any(|m| !(0.0..=1.0).contains(m)) {
            v.push("mean pool values must lie in [0,1]".to_string());
        }
        let mut sorted = self.mean_pool.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            v.push("mean pool values must be pairwise distinct".to_string());
        }
        if let RewardModel::TruncatedGaussian { sigma } = self.reward_model {
            if !(sigma.is_finite() && sigma >= 0.0) {
                v.push(format!(
                    "gaussian sigma must be finite and >= 0 (got {sigma})"
                ));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Times `t` in `2..=horizon` at which `floor(t^nu)` increments.
pub fn generate_breakpoints(nu: f64, horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = 1.0f64; // floor(1^nu)
    for t in 2..=horizon {
        let cur = (t as f64).powf(nu).floor();
        if cur > prev {
            out.push(t);
        }
        prev = cur;
    }
    out
}

/// Draws `n` pairwise-distinct pool values in uniformly random order.
pub fn assign_means<R: Rng + ?Sized>(pool: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n > pool.len() {
        return Err(Error::InvalidConfig(vec![format!(
            "mean pool has {} values but N={n} distinct means are needed",
            pool.len()
        )]));
    }
    let mut values = pool.to_vec();
    let (chosen, _) = values.partial_shuffle(rng, n);
    Ok(chosen.to_vec())
}

/// A maximal run of steps with constant means.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub means: Vec<f64>,
}

/// Piecewise-constant per-arm means over `1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTimeline {
    horizon: usize,
    breakpoints: Vec<usize>,
    segments: Vec<Segment>,
    delta_min: f64,
}

impl MeanTimeline {
    /// Builds the timeline of `cfg` from its seed.
    pub fn generate(cfg: &EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = stream_rng(cfg.seed, "env/means", 0);
        let breakpoints = generate_breakpoints(cfg.nu, cfg.horizon);
        let mut starts = Vec::with_capacity(breakpoints.len() + 1);
        starts.push(1);
        starts.extend_from_slice(&breakpoints);
        let mut segment_means = Vec::with_capacity(starts.len());
        for _ in &starts {
            segment_means.push(assign_means(&cfg.mean_pool, cfg.num_arms, &mut rng)?);
        }
        Self::from_segments(cfg.horizon, &starts, segment_means)
    }

    /// Assembles a timeline from explicit segment starts (first must be 1) and means.
    pub fn from_segments(horizon: usize, starts: &[usize], means: Vec<Vec<f64>>) -> Result<Self> {
        let mut problems = Vec::new();
        if horizon == 0 {
            problems.push("horizon must be >= 1".to_string());
        }
        if starts.first() != Some(&1) {
            problems.push("first segment must start at t=1".to_string());
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) || starts.last().is_some_and(|&s| s > horizon) {
            problems
                .push("segment starts must be strictly increasing within 1..=horizon".to_string());
        }
        if starts.len() != means.len() {
            problems.push("one mean vector per segment is required".to_string());
        }
        let num_arms = means.first().map_or(0, Vec::len);
        if num_arms == 0 || means.iter().any(|m| m.len() != num_arms) {
            problems.push("every segment needs the same positive number of arms".to_string());
        }
        if means.iter().flatten().any(|m| !(0.0..=1.0).contains(m)) {
            problems.push("means must lie in [0,1]".to_string());
        }
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }

        let mut delta_min = f64::INFINITY;
        for m in &means {
            let mut sorted = m.clone();
            sorted.sort_by(f64::total_cmp);
            for w in sorted.windows(2) {
                delta_min = delta_min.min(w[1] - w[0]);
            }
        }
        if num_arms > 1 && delta_min <= 0.0 {
            return Err(Error::InvalidConfig(vec![
                "arm means within a segment must be pairwise distinct".to_string(),
            ]));
        }

        let segments = starts
            .iter()
            .zip(means)
            .enumerate()
            .map(|(i, (&start, means))| Segment {
                start,
                end: starts.get(i + 1).map_or(horizon, |&next| next - 1),
                means,
            })
            .collect();
        Ok(MeanTimeline {
            horizon,
            breakpoints: starts[1..].to_vec(),
            segments,
            delta_min,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_arms(&self) -> usize {
        self.segments[0].means.len()
    }

    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Minimum gap between any two arm means within any segment
    /// (`+inf` for a single arm).
    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    /// Index of the segment active at `t`.
    pub fn segment_index(&self, t: usize) -> Result<usize> {
        self.check_time(t)?;
        Ok(self.breakpoints.partition_point(|&b| b <= t))
    }

    pub fn means_at(&self, t: usize) -> Result<&[f64]> {
        let i = self.segment_index(t)?;
        Ok(&self.segments[i].means)
    }

    pub fn mean_at(&self, arm: usize, t: usize) -> Result<f64> {
        let means = self.means_at(t)?;
        means.get(arm).copied().ok_or(Error::ArmOutOfRange {
            arm,
            num_arms: means.len(),
        })
    }

    pub fn sample_reward<R: Rng + ?Sized>(
        &self,
        model: &RewardModel,
        arm: usize,
        t: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let mean = self.mean_at(arm, t)?;
        Ok(model.sample(mean, rng))
    }

    /// Renders the text dump: a header `N M T nu seed`, then
    /// `t_start t_end mu_1 ... mu_N` per segment with six decimals.
    pub fn dump(&self, cfg: &EnvConfig) -> String {
        let mut out = format!(
            "{} {} {} {} {}\n",
            cfg.num_arms, cfg.num_players, cfg.horizon, cfg.nu, cfg.seed
        );
        for seg in &self.segments {
            write!(out, "{} {}", seg.start, seg.end).unwrap();
            for m in &seg.means {
                write!(out, " {m:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn check_time(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon {
            Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }
}
