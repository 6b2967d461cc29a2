use thiserror::Error;

/// Errors raised by ingestion, estimation, testing and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("empty input: no data rows")]
    EmptyInput,

    #[error("partition error: {0}")]
    Partition(String),

    #[error("tuning error: {0}")]
    Tuning(String),

    #[error("sample size error: subset {subset} has {have} observations, need at least {need}")]
    SampleSize {
        subset: String,
        have: usize,
        need: usize,
    },

    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    #[error(
        "degenerate denominator: |zeta+ - zeta-| = {gap:e} (lambda non-constancy violated or {label} irrelevant)"
    )]
    DegenerateDenominator { label: String, gap: f64 },

    #[error("degenerate weight: {side} tail ratio {value} is within 1e-10 of 1")]
    DegenerateWeight { side: &'static str, value: f64 },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("dominance violation: alpha_H = {alpha_h} must exceed alpha_G = {alpha_g} > 0")]
    DominanceViolation { alpha_g: f64, alpha_h: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for the failures that stem from a near-singular tail-ratio system
    /// rather than from malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTail(_)
                | Error::DegenerateDenominator { .. }
                | Error::DegenerateWeight { .. }
                | Error::DegenerateVariance(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
