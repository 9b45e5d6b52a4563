use std::fmt;

use thiserror::Error;

/// A single data-validation finding, located by row and column when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// 1-based data row (header excluded).
    pub row: Option<usize>,
    pub column: Option<String>,
    pub message: String,
}

impl Issue {
    pub fn new(message: impl Into<String>) -> Self {
        Issue {
            row: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn at(row: usize, column: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            row: Some(row),
            column: Some(column.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.row, &self.column) {
            (Some(r), Some(c)) => write!(f, "row {r}, column {c}: {}", self.message),
            (Some(r), None) => write!(f, "row {r}: {}", self.message),
            (None, Some(c)) => write!(f, "column {c}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{file}: {} validation error(s): {}", issues.len(), join_issues(issues))]
    Schema { file: String, issues: Vec<Issue> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("oracle refused: {zones} residential zones exceeds the limit of {limit}")]
    OracleGuard { zones: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Schema { .. } => "schema",
            Error::Config(_) => "config",
            Error::OracleGuard { .. } => "oracle_guard",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

/// Issues listed in an error message before the rest are summarized.
const LISTED_ISSUES: usize = 20;

fn join_issues(issues: &[Issue]) -> String {
    let mut text = issues
        .iter()
        .take(LISTED_ISSUES)
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    if issues.len() > LISTED_ISSUES {
        text.push_str(&format!("; and {} more", issues.len() - LISTED_ISSUES));
    }
    text
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
