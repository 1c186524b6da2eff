use thiserror::Error;

/// Errors produced by pricing, calibration and data handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error(
        "quadrature missed tolerance {requested:e} (estimated error {achieved:e}) \
         after {subdivisions} subdivisions"
    )]
    QuadratureNotConverged {
        requested: f64,
        achieved: f64,
        subdivisions: usize,
    },

    #[error("characteristic function modulus {modulus:e} at phi = {phi} is not negligible")]
    TruncationTail { phi: f64, modulus: f64 },

    #[error("nested quadrature not converged under refinement (relative change {0:e})")]
    NestedRefinement(f64),

    #[error("implied volatility has no solution: {0}")]
    NoSolution(String),

    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    #[error("schema error: missing required column `{0}`")]
    MissingColumn(String),

    #[error("empty chain: {0}")]
    EmptyChain(String),

    #[error("pricing failed for quote {index}: {source}")]
    QuotePricing {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
