use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("position is inside obstacle (clearance {clearance})")]
    InsideObstacle { clearance: f64 },

    #[error("position is outside the channel")]
    OutsideChannel,

    #[error("gradient vanishes (stagnation point)")]
    Stagnation,

    #[error("singular sway-yaw mass matrix (det {0})")]
    SingularMass(f64),

    #[error("no sign change in bracket [{lo}, {hi}] while solving for propeller revolutions")]
    NoBracket { lo: f64, hi: f64 },

    #[error("state diverged for agent {agent} at t'={time}: {what}")]
    Diverged { agent: u32, time: f64, what: String },

    #[error("rejection sampling exhausted after {0} attempts")]
    SamplingExhausted(usize),

    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
