//! Multi-player stochastic bandits in abruptly-changing environments.
//!
//! A run pits `M` non-communicating players against `N` arms whose means
//! switch at breakpoints. A player earns the arm's reward only when it is
//! the sole selector of that arm at that step. The crate provides:
//!
//! * [`env`]: breakpoint schedules, piecewise-constant mean timelines and
//!   reward sampling,
//! * [`window`]: incremental sliding-window statistics,
//! * [`policies`]: stationary UCB/DLP baselines, SW-UCB#, RR-SW-UCB# and
//!   SW-DLP,
//! * [`sim`]: the step loop with collision resolution and pseudo-regret,
//! * [`metrics`]: regret ratios, misidentification counters, aggregation and
//!   CSV output,
//! * [`batch`]: data-parallel execution of independent runs (rayon, behind
//!   the `parallel` feature) with a sequential fallback.
//!
//! Time is 1-based (`t = 1..=T`). Arm and player indices are 0-based.

pub mod batch;
pub mod env;
mod error;
pub mod metrics;
pub mod policies;
pub mod seeding;
pub mod sim;
pub mod window;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
