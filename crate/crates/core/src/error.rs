//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter combination (bad degree, probability out of range, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A data file could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The integrator blew up: a membrane potential exceeded the divergence
    /// ceiling, which signals misconfigured weights or parameters.
    #[error("numeric fault: unit {unit} diverged at tick {tick} (v = {potential:.3e})")]
    Divergence {
        unit: usize,
        tick: u32,
        potential: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
