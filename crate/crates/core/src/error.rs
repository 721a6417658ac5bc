use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("reference-only evaluation: instance size {size} exceeds limit {limit}")]
    ReferenceOnly { size: usize, limit: usize },

    /// The Gram matrix is numerically singular, usually because two taps
    /// collapsed onto (nearly) the same delay/Doppler point.
    #[error("near-singular Gram matrix (condition {condition:.3e}); most coherent taps: {taps:?}")]
    SingularGram {
        taps: Option<(usize, usize)>,
        condition: f64,
    },

    #[error("could not satisfy minimum {axis} separation after {draws} draws")]
    InfeasibleSeparation { axis: &'static str, draws: usize },

    #[error("waveform needs {samples} samples, limit is {limit}")]
    SampleBudget { samples: usize, limit: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
