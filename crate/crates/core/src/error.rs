use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: score is not a finite number")]
    NonFiniteScore { line: u64 },

    #[error("file contains no data rows")]
    EmptyFile,

    #[error("development set contains no impostor comparisons")]
    NoImpostorsInDev,

    #[error("calibration set contains no impostor comparisons")]
    NoImpostors,

    #[error("no comparisons available for {0}")]
    EmptyCell(String),

    #[error("rate table has no homogeneous impostor cells")]
    NoHomogeneousCells,

    #[error("rate table has no genuine cells")]
    NoGenuineCells,

    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("at least two operating points are needed, got {0}")]
    TooFewPoints(usize),

    #[error("invalid operating-point grid: {0}")]
    InvalidGrid(String),

    #[error("invalid comparison record: {0}")]
    InvalidRecord(String),

    #[error("probe {0} has no mate in the gallery")]
    NotInGallery(String),

    #[error("empty cohort: {0}")]
    EmptyCohort(String),

    #[error("invalid identification trial: {0}")]
    InvalidTrial(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("unknown preset '{0}' (expected one of: fair3, unfair3)")]
    UnknownPreset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Fails with [`Error::Domain`] unless `value` lies in the closed unit interval.
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain { name, value })
    }
}
