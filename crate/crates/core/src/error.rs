use thiserror::Error;

use crate::topology::RouterAddr;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),

    #[error("{kind} port {port} out of range (must be < {limit})")]
    PortOutOfRange {
        kind: &'static str,
        port: u32,
        limit: u32,
    },

    #[error("router {addr} is not part of D3({k},{m})")]
    AddressOutOfRange { addr: RouterAddr, k: u32, m: u32 },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    /// A scheduler or algorithm was asked to run outside the hypothesis it
    /// is valid for. `hypothesis` names the failed condition.
    #[error("precondition violated: {what} (requires {hypothesis})")]
    Precondition {
        what: String,
        hypothesis: &'static str,
    },

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error("simulation did not finish within {max_steps} steps ({in_flight} packets still in flight)")]
    StepLimit { max_steps: u32, in_flight: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
