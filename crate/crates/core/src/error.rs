use std::path::PathBuf;

use thiserror::Error;

use crate::hilbert::Subsystem;

#[derive(Debug, Error)]
pub enum QbattError {
    #[error("kron requires at least one factor")]
    EmptyFactors,
    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("subsystem dimensions {dims:?} do not multiply to matrix dimension {dim}")]
    DimensionMismatch { dims: Vec<usize>, dim: usize },
    #[error("subsystem {0} appears more than once")]
    DuplicateSubsystem(Subsystem),
    #[error("subsystem {0} is not part of the operator")]
    MissingSubsystem(Subsystem),
    #[error("subsystem layouts differ: {0}")]
    LayoutMismatch(String),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("noise strength k = {0} outside [0, 1]")]
    NoiseStrength(f64),
    #[error("GHZ parameter l = {0} outside [-1, 1]")]
    GhzParameter(f64),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("cannot plot: {0}")]
    Plot(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, QbattError>;
