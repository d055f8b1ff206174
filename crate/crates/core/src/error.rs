use thiserror::Error;

/// Errors produced by the numerical routines and the batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ions {0} and {1} coincide")]
    CoincidentIons(usize, usize),

    #[error("parameters outside the domain of the formula: {0}")]
    Domain(String),

    #[error("no closed form available: {0}")]
    Unsupported(String),

    #[error("equilibrium search did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("configuration is not an equilibrium (gradient norm {0:.3e})")]
    NotEquilibrium(f64),

    #[error("unstable quadratic model: {0}")]
    Unstable(String),

    #[error("pole of the boundary equation at alpha = {0}")]
    Pole(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Invalid(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
