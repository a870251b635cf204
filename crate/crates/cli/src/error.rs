use std::fmt;

use gmt_core::data::DataError;
use gmt_core::eval::EvalError;
use gmt_core::partition::PartitionError;
use gmt_core::tree::TreeError;

/// Failure of a subcommand, carrying the process exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or combinations (exit 1).
    Usage(String),
    /// Unreadable or malformed input files (exit 2).
    Data(String),
    /// Model and data disagree on schema or shape (exit 3).
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Mismatch(m) => f.write_str(m),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PartitionError> for CliError {
    fn from(e: PartitionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::DimensionMismatch { .. } => CliError::Mismatch(e.to_string()),
            TreeError::Config(_) | TreeError::Partition(_) => CliError::Usage(e.to_string()),
            TreeError::Import(_) | TreeError::Io(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Data(e) => e.into(),
            EvalError::Tree(e) => e.into(),
            EvalError::SchemaMismatch(_) => CliError::Mismatch(e.to_string()),
            EvalError::Spec(_) => CliError::Usage(e.to_string()),
            EvalError::EmptyTestSet | EvalError::Dataset { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
