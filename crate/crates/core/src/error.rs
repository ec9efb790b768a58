use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("numeric failure in {what}: {diagnostics}")]
    Numeric { what: String, diagnostics: String },
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),
    #[error("value {t} outside bracket range [{lo}, {hi}]")]
    Bracket { t: f64, lo: f64, hi: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("indeterminate variation class: {0}")]
    IndeterminateClassification(String),
    #[error("declared variation class {declared} contradicts diagnostic {diagnosed}")]
    ClassificationConflict { declared: String, diagnosed: String },
    #[error("point at depth {depth} has no unique boundary projection (R = {r_ball})")]
    NonUniqueProjection { depth: f64, r_ball: f64 },
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("surface quadrature quality: {0}")]
    Quality(String),
    #[error("perimeter diverges for unbounded-variation models")]
    DivergentPerimeter,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ShcError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(ShcError::InvalidArgument(msg.into()))
}
