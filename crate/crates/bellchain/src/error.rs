//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, scenario validation, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("subsystem not pure: alpha must be exactly 0 or 1, got {0}")]
    SubsystemNotPure(f64),

    #[error("scenario needs at least two settings per side, got {0}")]
    ScenarioTooSmall(usize),

    #[error("alice and bob setting lists differ in length ({alice} vs {bob})")]
    MismatchedSettings { alice: usize, bob: usize },

    #[error("epsilon must be a positive finite number, got {0}")]
    InvalidEpsilon(f64),

    #[error("setting index {index} out of range for {count} settings")]
    SettingOutOfRange { index: usize, count: usize },

    #[error("chain size {n} exceeds the enumeration budget (max {max})")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("invalid behavior box: {0}")]
    InvalidBox(String),

    #[error("invalid decomposition model: {0}")]
    InvalidModel(String),

    #[error("deterministic check requires exact 0/1 entries, found {0}")]
    NonDeterministicEntry(f64),

    #[error("BKP bound presupposes no-signalling (violation {violation:.3e} in box z={z})")]
    SignallingBox { z: usize, violation: f64 },

    #[error("z_count must be at least 1")]
    EmptyAlphabet,

    #[error("linear program solve failed: {0}")]
    Solver(String),

    #[error("undersampled chain pair (a={a_index}, b={b_index}): {got} samples, need at least {need}")]
    Undersampled {
        a_index: usize,
        b_index: usize,
        got: u64,
        need: u64,
    },

    #[error("confidence must lie strictly between 0 and 1, got {0}")]
    InvalidConfidence(f64),

    #[error("rounds must be at least 1")]
    NoRounds,

    #[error("model parse error at line {line}, column {column}: {message}")]
    ModelParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("model schema error: {0}")]
    ModelSchema(String),

    #[error("trial log parse error at line {line}: {message}")]
    TrialLogParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
