//! Crate-wide error type.
//!
//! Errors are grouped by how the command-line front end reports them:
//! configuration problems (exit code 2), physics-level failures such as
//! ambiguous state labeling or excessive leakage (exit code 3), and
//! numerical problems (exit code 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dense assembly limited to 8 sites, region has {0}")]
    RegionTooLarge(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state labeling failed for bitstring {bitstring:#b}: {reason}")]
    Labeling { bitstring: u64, reason: String },

    #[error("leakage {p_leak:.3e} exceeds {limit:.3e}; unitary approximation invalid")]
    LeakageTooLarge { p_leak: f64, limit: f64 },

    #[error("eigensolve did not converge: {0}")]
    Convergence(String),

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error("error rate {0:.3e} outside [0, 1]")]
    InvalidRate(f64),

    #[error("fidelity objective argument {0:.3e} is not positive")]
    FidelityOverflow(f64),

    #[error("finite-difference coefficients are stale: {0}")]
    StaleCoefficients(String),

    #[error("problem too large for exhaustive search: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::RegionTooLarge(_) | Error::Dimension(_) => 2,
            Error::Labeling { .. } | Error::LeakageTooLarge { .. } => 3,
            Error::Convergence(_)
            | Error::Numerical(_)
            | Error::InvalidRate(_)
            | Error::FidelityOverflow(_)
            | Error::StaleCoefficients(_)
            | Error::Infeasible(_) => 4,
        }
    }
}
