use thiserror::Error;

pub type Result<T, E = CcsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CcsError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid identifier `{0}`")]
    Identifier(String),

    #[error("expression `{0}` is not closed")]
    NotClosed(String),

    #[error("expression `{expr}` has free variables other than {var}")]
    NotXClosed { expr: String, var: String },

    #[error("state space exceeds the cap of {cap} states")]
    StateCap { cap: usize },

    #[error("lasso enumeration exceeds the cap of {cap} lassos")]
    LassoCap { cap: usize },

    #[error("relation is not an equivalence: {0}")]
    NotEquivalence(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed .aut input at line {line}: {message}")]
    Aut { line: usize, message: String },

    #[error("malformed relation: {0}")]
    Relation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CcsError {
    /// True for the resource-limit failures (state cap, lasso cap).
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, CcsError::StateCap { .. } | CcsError::LassoCap { .. })
    }
}
