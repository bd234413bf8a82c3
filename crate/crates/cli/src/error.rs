use cfgraph::dataset::DatasetError;
use cfgraph::explain::ExplainError;
use cfgraph::search::SearchError;
use cfgraph::whitebox::WhiteboxError;
use cfgraph::{GraphError, OracleError};
use serde::Serialize;
use thiserror::Error;

/// Failure class; each maps to a distinct process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Data,
    Oracle,
    Search,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Oracle => 4,
            ErrorKind::Search => 5,
        }
    }
}

#[derive(Debug, Error, Serialize)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, message)
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::data(format!("{}: {e}", path.display()))
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Self::new(ErrorKind::Oracle, e.to_string())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Config(_) => Self::usage(e.to_string()),
            SearchError::Graph(_) => Self::new(ErrorKind::Search, e.to_string()),
        }
    }
}

impl From<WhiteboxError> for CliError {
    fn from(e: WhiteboxError) -> Self {
        match e {
            WhiteboxError::BadContrastSets | WhiteboxError::NonFinite => Self::usage(e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::Search(s) => s.into(),
            other => Self::data(other.to_string()),
        }
    }
}
