use hseg::{AdapterError, ExplainError, HierarchyError, MaskIoError};

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Input(#[from] MaskIoError),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("degenerate segmentation: {0}")]
    Segmentation(HierarchyError),
    #[error("model adapter failed: {0}")]
    Adapter(#[from] AdapterError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Segmentation(_) => 3,
            CliError::Adapter(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::DegenerateSegmentation(_) => CliError::Segmentation(e),
            // inputs that do not fit together are usage errors
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::Config(m) => CliError::Config(m),
            ExplainError::Segmentation(h) => h.into(),
            ExplainError::Adapter(a) => CliError::Adapter(a),
            ExplainError::Fit(f) => CliError::Other(format!("surrogate fit failed: {f}")),
        }
    }
}
