use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridNavError {
    #[error("malformed grid header at {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}:{line}: row has {got} cells, expected {expected}")]
    RowLength {
        path: PathBuf,
        line: usize,
        got: usize,
        expected: usize,
    },

    #[error("{path}:{line}: illegal cell character '{ch}'")]
    IllegalCell {
        path: PathBuf,
        line: usize,
        ch: char,
    },

    #[error("scenario generation failed for seed {seed} after {attempts} attempts: no free path from start to goal")]
    GenerationFailure { seed: u64, attempts: u32 },

    #[error("position ({x}, {y}) is outside the grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("sensor position ({x}, {y}) is inside an obstacle")]
    SensorInObstacle { x: f64, y: f64 },

    #[error("grid dimension mismatch: {a_w}x{a_h} vs {b_w}x{b_h}")]
    DimensionMismatch {
        a_w: usize,
        a_h: usize,
        b_w: usize,
        b_h: usize,
    },

    #[error("observation conflicts with known cell ({col}, {row})")]
    ObservationConflict { col: usize, row: usize },

    #[error("oracle predictor requested without a ground-truth grid")]
    OracleWithoutTruth,

    #[error("horizon must be at least 2, got {0}")]
    HorizonTooShort(usize),

    #[error("trajectory has {got} waypoints, expected {expected}")]
    TrajectoryLength { got: usize, expected: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GridNavError>;
