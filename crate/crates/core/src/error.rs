use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Every violated constraint, in the order they were checked.
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("time {t} outside 1..={horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("arm {arm} outside 0..{num_arms}")]
    ArmOutOfRange { arm: usize, num_arms: usize },
    #[error("initialization step {t} is past the {num_arms} arms")]
    InitStepOutOfRange { t: usize, num_arms: usize },
    #[error("non-sequential update: expected t={expected}, got t={got}")]
    NonSequential { expected: usize, got: usize },
    #[error("episode was run without trace retention")]
    TraceNotRetained,
    #[error("series have different time grids")]
    MismatchedGrids,
    #[error("nothing to aggregate")]
    EmptyAggregate,
}
