use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter for `{family}`: {reason}")]
    InvalidParameter { family: String, reason: String },

    #[error("tabulated weights carry mass {mass}, which deviates from 1 beyond tolerance")]
    UnnormalizedTable { mass: f64 },

    #[error("Re(u) = {re} lies outside the MGF domain ({lo}, {hi})")]
    Domain { re: f64, lo: f64, hi: f64 },

    #[error("slope {slope} is outside the attainable range ({lo}, {hi})")]
    SlopeOutOfRange { slope: f64, lo: f64, hi: f64 },

    #[error("saddle solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature failed: estimated error {error:e} for value {value:e}")]
    QuadratureFailure { value: f64, error: f64 },

    #[error("convolution table of {needed} entries exceeds the memory budget of {budget}")]
    MemoryBudgetExceeded { needed: usize, budget: usize },

    #[error("grid too coarse: normalization drift {drift:e}")]
    GridTooCoarse { drift: f64 },

    #[error("endpoint {z} is not attainable in {n} steps")]
    UnattainableEndpoint { n: usize, z: f64 },

    #[error("expected 0 <= s <= t <= n, got s = {s}, t = {t}, n = {n}")]
    OrderViolation { s: f64, t: f64, n: f64 },

    #[error("probability {p} must lie strictly inside (0, 1)")]
    ProbabilityDomain { p: f64 },

    #[error("operation requires a {expected} jump distribution")]
    WrongKind { expected: &'static str },

    #[error("invalid experiment spec: {0}")]
    Spec(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(family: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            family: family.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_spec_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::UnnormalizedTable { .. }
                | Error::Spec(_)
                | Error::WrongKind { .. }
                | Error::UnattainableEndpoint { .. }
                | Error::OrderViolation { .. }
                | Error::ProbabilityDomain { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Spec(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
