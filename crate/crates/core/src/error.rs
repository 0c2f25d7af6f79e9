use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({x}, {y}, {w}, {h}): width and height must be positive and finite")]
    InvalidBox { x: f64, y: f64, w: f64, h: f64 },

    #[error("detection score {0} outside [0, 1]")]
    InvalidScore(f64),

    #[error("frame index must be >= 1, got {0}")]
    InvalidFrame(u32),

    #[error("{key} = {value} is out of range (legal: {range})")]
    OutOfRange {
        key: String,
        value: String,
        range: &'static str,
    },

    #[error("kalman state cannot be converted to a box: area {area}, aspect ratio {ratio}")]
    DegenerateState { area: f64, ratio: f64 },

    #[error("innovation covariance is not positive definite")]
    IllConditioned,

    #[error("frame {got} received after frame {last}; frames must be strictly increasing")]
    FrameOrder { last: u32, got: u32 },

    #[error("tracklet {0} has no points")]
    EmptyTracklet(u32),

    #[error("metrics undefined: ground truth contains no boxes")]
    EmptyGroundTruth,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("cannot order `{0}`: file stem has no trailing frame number")]
    NonNumericStem(String),

    #[error("`{0}` and `{1}` map to the same frame number")]
    DuplicateFrameNumber(String, String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn out_of_range(key: &str, value: impl ToString, range: &'static str) -> Self {
        Error::OutOfRange {
            key: key.to_string(),
            value: value.to_string(),
            range,
        }
    }
}
