use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("world length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unknown theme `{0}`")]
    UnknownTheme(String),

    #[error("unknown character `{0}`")]
    UnknownCharacter(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("state world contains a don't-care value at proposition {0}")]
    DontCareInState(usize),

    #[error("enumerating {states} states exceeds the limit of {limit}")]
    EnumerationTooLarge { states: u128, limit: u128 },

    #[error("edge from ({0}, {1}) to ({0}, {1}) has no displacement")]
    EmptyEdge(u32, u32),

    #[error("sketch has {movements} unit movements, more than the limit of {limit}")]
    SketchTooLarge { movements: u64, limit: u64 },

    #[error("both axes address the same worldview `{0}`")]
    SameAxes(String),

    #[error("sketch fitting only supports the binary range [0, 1], got [{min}, {max}]")]
    NonBinaryRange { min: u32, max: u32 },

    #[error("sketch mode is `{found}` but `{expected}` was required")]
    WrongSketchMode {
        expected: &'static str,
        found: &'static str,
    },

    #[error("start world sits at ({found_x}, {found_y}) but the first edge starts at ({x}, {y})")]
    StartPositionMismatch { x: u32, y: u32, found_x: u32, found_y: u32 },

    #[error("model failed validation with {} violation(s)", .0.len())]
    InvalidModel(Vec<Violation>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported document version {0}")]
    UnsupportedVersion(u64),

    #[error("trace replay diverged at record {index}: {reason}")]
    ReplayDiverged { index: usize, reason: String },
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
