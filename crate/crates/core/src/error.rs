use thiserror::Error;

/// Errors produced by estimation, synthesis and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The design moment matrix is numerically singular. `j` names the
    /// harmonic block, or is 0 for the joint design.
    #[error("degenerate frequency: design block {j} at lambda={lambda} is singular")]
    DegenerateFrequency { j: usize, lambda: f64 },

    /// The second derivative of the criterion is too small to take a Newton step.
    #[error("degenerate curvature at lambda={lambda}: g''={curvature}")]
    DegenerateCurvature { lambda: f64, curvature: f64 },

    /// A proposed iterate left the admissible interval (0, pi/p).
    #[error("iterate {lambda_next} left the admissible interval (0, {upper})")]
    Boundary { lambda_next: f64, upper: f64 },

    /// Autocorrelation of a constant series.
    #[error("autocorrelation is undefined for a constant series")]
    UndefinedAcf,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
