use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid form system: {0}")]
    InvalidSystem(String),

    #[error("modulus mismatch: expected {expected}, found {found}")]
    ModulusMismatch { expected: u64, found: u64 },

    #[error("{what}: budget exceeded (needs {needed}, cap {cap})")]
    BudgetExceeded { what: String, needed: u128, cap: u128 },

    #[error("time budget of {ms} ms exhausted during {what}")]
    Timeout { what: String, ms: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("element is not in the modeled group: {0}")]
    NotInGroup(String),

    #[error("Taylor coefficient {index} is not in G_{index}")]
    LevelViolation { index: usize },

    #[error("divisibility failure: hcf(k) = {hcf} does not divide {value}")]
    Divisibility { hcf: i128, value: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal check failed: {0}")]
    Internal(String),

    #[error("unknown criterion '{id}'; valid ids: {valid}")]
    UnknownCriterion { id: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for the errors that signal an exhausted budget (CLI exit code 2).
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::Timeout { .. })
    }

    pub(crate) fn budget(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed,
            cap,
        }
    }
}
