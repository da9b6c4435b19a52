use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Validation and I/O failures shared across the crate.
///
/// Stage failures of the constructive pipelines (embedding, stitching) carry
/// their own richer types; they convert into [`Error::Stage`] when bubbled up
/// to callers that only need a message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact enumeration needs {needed} checks but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph has {n} vertices; this operation is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{stage}: {detail}")]
    Stage { stage: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
