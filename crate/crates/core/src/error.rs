use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{op}: precondition violated: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("sequence family cannot produce a member of order {order}: {detail}")]
    UnsatisfiableFamily { order: usize, detail: String },

    #[error("{op}: search budget of {budget} nodes exhausted")]
    BudgetExhausted { op: &'static str, budget: u64 },

    #[error("{op}: no copy found: {detail}")]
    NotFound { op: &'static str, detail: String },

    #[error("{op}: gave up after {retries} attempts: {detail}")]
    RetriesExhausted {
        op: &'static str,
        retries: usize,
        detail: String,
    },

    #[error("hypergraph embedding stuck after placing {placed} of {total} vertices")]
    EmbeddingStuck { placed: usize, total: usize },

    #[error("switching chain exhausted for pair ({x}, {y})")]
    ChainExhausted { x: usize, y: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            detail: detail.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
