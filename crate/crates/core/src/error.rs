use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no finite gap exists: the weight's tail integral diverges")]
    NoFiniteGap,

    #[error("tail integral inconclusive (partial sum {partial})")]
    TailInconclusive { partial: f64 },

    #[error("piece {piece}: gap {gap} is shorter than the required gap {required}")]
    GapTooShort { piece: usize, gap: f64, required: f64 },

    #[error("piece {piece}: function is not in K_{n} (sup {sup}, slope {slope})")]
    NotInClass {
        piece: usize,
        n: u32,
        sup: f64,
        slope: f64,
    },

    #[error("piece {piece}: time {time} is not an integer multiple of {unit}")]
    OffLattice { piece: usize, time: f64, unit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("engine `{engine}` cannot act on a {got} state")]
    StateMismatch { engine: &'static str, got: &'static str },

    #[error("no witness constructed at t = {t}: constructive threshold is {threshold}")]
    BelowThreshold { t: f64, threshold: f64 },

    #[error("no imaginary-eigenvalue dictionary found: {0}")]
    NoImaginaryEigen(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error in {location}: {msg}")]
    Config { location: String, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
