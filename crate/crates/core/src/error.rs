//! Error type shared by all analysis modules.

use thiserror::Error;

/// Errors produced by signal generation, spectral estimation and filtering.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal too short: need at least {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },

    #[error("signals do not share length and sample rate: {0}")]
    SignalMismatch(String),

    #[error("inputs were produced with different segmentation plans")]
    PlanMismatch,

    #[error("ensemble averaging requires at least 2 segments, got {0}")]
    TooFewSegments(usize),

    #[error("simulation diverged at t = {time:.6} s (|x| exceeded {bound:.3e})")]
    UnstableSimulation { time: f64, bound: f64 },

    #[error("frequency cell ({0}, {1}) lies outside the principal region")]
    CellOutOfRegion(usize, usize),

    #[error("frequency cell ({0}, {1}) has zero spectral amplitude everywhere; bicoherence undefined")]
    UndefinedCell(usize, usize),

    #[error("too few surrogate realizations: need at least {min}, got {got}")]
    TooFewRealizations { min: usize, got: usize },

    #[error("full-plane bispectrum is a validation tool limited to {max} positive bins, got {got}")]
    FullPlaneTooLarge { max: usize, got: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed input file `{path}`: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by unreadable or corrupt input files (as opposed
    /// to semantically invalid parameters). CLI front ends map these to a
    /// different exit code.
    pub fn is_io_like(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format { .. })
    }
}
