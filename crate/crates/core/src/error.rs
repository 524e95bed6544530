//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical routines.
///
/// Each variant maps onto one of the process exit codes used by the CLI
/// (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is non-finite, out of range or inconsistent with another.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Scanning for a root found zero or several sign changes.
    #[error("root isolation failed: {0}")]
    RootIsolation(String),
    /// A closed-form coefficient has a vanishing denominator.
    #[error("singular coefficient: {0}")]
    SingularCoefficient(String),
    /// The second harmonic 2μ₀ sits on the dispersion curve.
    #[error("second-harmonic resonance: {0}")]
    Resonance(String),
    /// The model coefficients do not admit a sech-type solitary wave.
    #[error("no solitary solution: {0}")]
    NoSoliton(String),
    /// A computed spectrum contradicts the expected discrete structure.
    #[error("spectral structure violation: {0}")]
    SpectralStructure(String),
    /// A discretization diagnostic (refinement, symmetry of an assembly) failed.
    #[error("discretization check failed: {0}")]
    Discretization(String),
    /// A root bracket does not contain a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),
    /// A modal problem was posed at the excluded q = 0 mode.
    #[error("singular mode: {0}")]
    SingularMode(String),
    /// A fixed-point iteration stopped contracting.
    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),
    /// An iterative eigenvalue search did not converge.
    #[error("eigenvalue search failed: {0}")]
    SearchFailure(String),
    /// A linear solve broke down.
    #[error("linear solver breakdown: {0}")]
    Solver(String),
    /// An input violates a required parity.
    #[error("symmetry error: {0}")]
    Symmetry(String),
    /// The coercivity probe found a non-positive quotient.
    #[error("coercivity violated: {0}")]
    Coercivity(String),
    /// A configuration file is malformed or fails validation.
    #[error("configuration error at `{field}`: {message}")]
    Config {
        /// Dotted path of the offending field.
        field: String,
        /// Human readable explanation.
        message: String,
    },
    /// Filesystem failure while writing results.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for configuration/argument problems, 3 for
    /// numerical non-convergence or structural failures, 4 for internal errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Domain(_) | Error::Config { .. } => 2,
            Error::RootIsolation(_)
            | Error::SpectralStructure(_)
            | Error::Discretization(_)
            | Error::Bracket(_)
            | Error::Divergence(_)
            | Error::SearchFailure(_)
            | Error::Solver(_)
            | Error::Coercivity(_) => 3,
            _ => 4,
        }
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), message: message.into() }
    }
}
