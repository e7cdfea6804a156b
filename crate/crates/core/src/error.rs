use thiserror::Error;

/// Errors raised by geometry construction, membership and audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector coordinates must be finite and non-empty")]
    InvalidVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} requires the Euclidean norm, space uses {norm}")]
    RequiresEuclidean { what: &'static str, norm: String },

    #[error("sampling budget exhausted after {attempts} rejections ({context})")]
    SamplingBudget { attempts: usize, context: String },

    #[error("direction net exceeded {cap} directions before reaching angle {beta}")]
    NetTooLarge { cap: usize, beta: f64 },

    #[error("covering has no congruence witnesses")]
    MissingWitnesses,

    #[error("sets leave a gap at probe {probe:?} (best membership defect {defect:e})")]
    CoverageGap { probe: Vec<f64>, defect: f64 },

    #[error("antipodal search residual {residual:e} exceeds tolerance {tol:e} (set {index})")]
    ResidualAboveTolerance { index: usize, point: Vec<f64>, residual: f64, tol: f64 },

    #[error("malformed covering file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
