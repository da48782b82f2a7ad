//! Crate-wide error type.

use std::fmt;

/// Errors produced by synthesis, tuning, simulation and surrogate routines.
#[derive(Debug)]
pub enum Error {
    /// A specification or configuration violates its invariants.
    InvalidSpec(String),
    /// The requested stopband attenuation cannot be met with the given taps.
    Infeasible {
        requested_atten_db: f64,
        achieved_atten_db: f64,
    },
    /// A coefficient exceeds the constant pulse amplitude, so the pulse width
    /// would exceed the tap interval.
    Normalization(String),
    /// Two spectra were expected on the same frequency grid.
    GridMismatch(String),
    /// The frequency grid does not cover a band required by a loss.
    GridCoverage(String),
    /// The reference sinc term is zero at the requested frequency.
    SincPole { freq_hz: f64 },
    /// A tuner loss evaluation failed.
    Evaluator(String),
    /// Circuit parameters outside their declared ranges.
    OutOfRange(String),
    /// Training produced a non-finite loss.
    TrainDiverged { epoch: usize, loss: f64 },
    /// Malformed input file (JSON config, pattern file, dataset, checkpoint).
    Parse(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid specification: {msg}"),
            Error::Infeasible {
                requested_atten_db,
                achieved_atten_db,
            } => write!(
                f,
                "infeasible: requested {requested_atten_db:.2} dB stopband attenuation, \
                 achieved {achieved_atten_db:.2} dB"
            ),
            Error::Normalization(msg) => write!(f, "normalization error: {msg}"),
            Error::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            Error::GridCoverage(msg) => write!(f, "grid coverage: {msg}"),
            Error::SincPole { freq_hz } => {
                write!(f, "sinc null in reference response at {freq_hz} Hz")
            }
            Error::Evaluator(msg) => write!(f, "evaluator error: {msg}"),
            Error::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
            Error::TrainDiverged { epoch, loss } => {
                write!(f, "training diverged at epoch {epoch} (loss {loss})")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serde_json's Display already carries line/column information.
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
