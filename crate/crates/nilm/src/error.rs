use std::io;

/// Errors shared across the simulation, encoding, and regression layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The logistic map is only defined on the unit interval.
    #[error("logistic map input {0} is outside [0, 1]")]
    LogisticDomain(f64),

    /// Seeds must lie strictly inside (0, 1).
    #[error("chaos seed {0} must lie strictly inside (0, 1)")]
    SeedOutOfRange(f64),

    /// Seeds on the map's fixed points or their short preimages produce a
    /// constant orbit instead of a chaotic one.
    #[error("chaos seed {0} maps onto a fixed point of the logistic map; pick a seed away from {{0, 0.25, 0.5, 0.75, 1}}")]
    DegenerateSeed(f64),

    /// The standby constant must exceed 1 so that OFF and ON levels are
    /// distinguishable.
    #[error("standby constant must exceed 1, got {0}")]
    InvalidStandbyConstant(f64),

    /// A two-level switch signal may only contain 1 or the standby constant.
    #[error("switch value {value} is neither 1 nor the standby constant {standby}")]
    InvalidSwitchValue { value: f64, standby: f64 },

    /// The switching schedule is too short for the requested time.
    #[error("switching schedule for load {load} exhausted: step {needed} requested but only {available} entries exist")]
    SequenceExhausted {
        load: usize,
        needed: usize,
        available: usize,
    },

    #[error("load index {index} out of range for a network of {loads} loads")]
    LoadIndexOutOfRange { index: usize, loads: usize },

    /// Switch functions are defined for non-negative times only.
    #[error("time {0} is negative; switch functions start at t = 0")]
    NegativeTime(f64),

    /// The integrator produced a non-finite charge or current.
    #[error("state became non-finite at t = {t}: {detail}")]
    NonFiniteState { t: f64, detail: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// Decoding enumerates all 2^M joint states, which is only practical for
    /// small networks.
    #[error("cannot decode a joint state for {0} loads (limit is 24)")]
    TooManyLoadsToDecode(usize),

    /// Training errors stopped being finite; the learning rate is too large
    /// for the data.
    #[error("kernel-Adaline training diverged during epoch {epoch}; lower eta")]
    Divergence { epoch: usize },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("malformed CSV input: {0}")]
    CsvSchema(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit code for the command-line front end: 2 for numerical
    /// blow-ups, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteState { .. } | Error::Divergence { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
