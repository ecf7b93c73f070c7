use thiserror::Error;

use crate::sim::RunLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("direction points behind the camera")]
    BehindCamera,

    #[error("full-velocity observer stepped without a group velocity")]
    MissingVelocity,

    #[error("consistent direction set has a non-trivial stabilizer ({} directions)", directions.len())]
    OracleDisagreement { directions: Vec<[f64; 3]> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run aborted after {} rows: {reason}", log.records.len())]
    Aborted { reason: String, log: Box<RunLog> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
