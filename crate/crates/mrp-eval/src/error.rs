//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, sampling, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("row {row} sums to {sum} (must be 1 within {tol})")]
    RowSum { row: usize, sum: f64, tol: f64 },

    #[error("probability {value} at row {row} outside [0, 1]")]
    ProbabilityOutOfRange { row: usize, value: f64 },

    #[error("duplicate target {target} in row {row}")]
    DuplicateTarget { row: usize, target: usize },

    #[error("target {target} in row {row} outside [0, {n})")]
    TargetOutOfRange { row: usize, target: usize, n: usize },

    #[error("gamma {0} outside the open interval (0, 1)")]
    GammaOutOfRange(f64),

    #[error("stddev {value} at state {state} is negative")]
    NegativeStddev { state: usize, value: f64 },

    #[error("deterministic reward model has nonzero stddev at state {0}")]
    DeterministicNonzeroStddev(usize),

    #[error("out degree {out_degree} exceeds available states {n}")]
    OutDegreeTooLarge { out_degree: usize, n: usize },

    #[error("reachable size {reachable} exceeds nominal state count {n}")]
    ReachableTooLarge { reachable: usize, n: usize },

    #[error("state index {state} outside [0, {n})")]
    StateOutOfRange { state: usize, n: usize },

    #[error("sampling strategy invalid for this process: {0}")]
    StrategyMismatch(String),

    #[error("step stream malformed at record {position}: {reason}")]
    MalformedStream { position: usize, reason: String },

    #[error("value vector norm is zero; relative error undefined")]
    ZeroNormTruth,

    #[error("state count {n} exceeds the dense direct-solve limit {limit}")]
    DeskScaleExceeded { n: usize, limit: usize },

    #[error("direct solve failed: {0}")]
    SingularSystem(String),

    #[error("model has no visited states")]
    EmptyModel,

    #[error("row {row} has absolute sum {sum} >= 1; supply a custom split")]
    RowNotDominant { row: usize, sum: f64 },

    #[error("walk row {row} sums to {sum}; must be strictly below 1")]
    WalkRowSum { row: usize, sum: f64 },

    #[error("matrix infinity norm {norm} >= 1; series does not converge")]
    NormTooLarge { norm: f64 },

    #[error("inverse entry {value} outside [0, {max}]")]
    EntryOutOfRange { value: f64, max: f64 },

    #[error("step size {0} outside (0, 1]")]
    AlphaOutOfRange(f64),

    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("feature matrix rank deficient: effective rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("feature row missing for state {0}")]
    MissingFeatureRow(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
