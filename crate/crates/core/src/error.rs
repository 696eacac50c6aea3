use thiserror::Error;

/// Errors raised by the engine, the simulator and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("ambiguous tradeoff region at (rho={rho}, tau={tau}): {first} and {second} both hold")]
    AmbiguousRegion {
        rho: f64,
        tau: f64,
        first: char,
        second: char,
    },

    #[error("degenerate geometry: two nodes coincide after redraw")]
    DegenerateGeometry,

    #[error("ill-conditioned Gram matrix (condition estimate {condition:e})")]
    IllConditionedGram { condition: f64 },

    #[error("user {user} has a zero-norm precoder")]
    ZeroNormPrecoder { user: usize },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("no successful trials at grid point {index} (n = {n})")]
    InsufficientPoints { index: usize, n: f64 },

    #[error("{excluded} of {total} trials excluded for {series}, above the 10% limit")]
    ExcessiveExclusions {
        series: String,
        excluded: usize,
        total: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.into(),
    }
}
