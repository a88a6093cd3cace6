//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The scattering coefficient a(lambda) collapsed below the degeneracy
    /// threshold at a real frequency, which signals near-soliton content.
    #[error("numerical degeneracy: |a| = {magnitude:e} < {threshold:e} at lambda = {lambda:e} rad/s")]
    Degenerate {
        lambda: f64,
        magnitude: f64,
        threshold: f64,
    },

    #[error("reconstruction overflow at peel step {step}: non-finite reflection response")]
    ReconstructionOverflow { step: usize },

    #[error("layer peel failed to converge: residual {residual:e} after {iterations} iterations")]
    ConvergenceFailure { residual: f64, iterations: usize },

    #[error("numerical fault in layer {layer}: non-finite values")]
    NumericalFault { layer: String },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
