use thiserror::Error;

/// Errors produced by the bounds and lineshape engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its physical range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("covariance matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularCovariance { cond: f64 },

    #[error("degenerate flat lineshape: T_res = T_off = {0}")]
    FlatLineshape(f64),

    #[error("transmission is non-positive at Λ = {lambda}; enable the epsilon floor for phase reconstruction")]
    NonPositiveTransmission { lambda: f64 },

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds {tolerance:.3e}")]
    QuadratureDidNotConverge { estimate: f64, tolerance: f64 },

    #[error("Λ = {lambda} is outside the trusted range [{lo}, {hi}] of the reconstructed phase")]
    OutsideTrustedRange { lambda: f64, lo: f64, hi: f64 },

    #[error("operation requires a Lorentzian lineshape, got {0}")]
    UnsupportedLineshape(String),

    #[error("tabulated lineshape: {0}")]
    Tabulated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
