//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad or inconsistent configuration input.
    #[error("config: {0}")]
    Config(String),

    /// Inputs that make a requested quantity undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Transfer/scattering conversion hit a zero pivot.
    #[error("singular matrix conversion: zero pivot in partial inversion")]
    SingularConversion,

    /// The intracavity linear system of a ring cavity is singular.
    #[error("degenerate cavity: intracavity field system is singular")]
    DegenerateCavity,

    /// Fixed-point iteration of the nonlinear steady state failed.
    #[error("nonlinear solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Axial position outside the cavity.
    #[error("position {z:.6e} m outside [0, {len:.6e}] m")]
    OutOfRange { z: f64, len: f64 },

    /// Correlation statistic requested on a degenerate profile.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
