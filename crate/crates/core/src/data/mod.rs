//! Dataset ingestion: schema files, dummy encoding of categoricals,
//! per-dimension sorted indices and k-fold plans.

mod dataset;
mod folds;
mod schema;

pub use dataset::{load_csv, parse_csv, read_feature_rows, DataSet, FeatureRow, SubsetView};
pub use folds::{kfold_indices, FoldPlan};
pub use schema::{ColumnSpec, FeatureGroup, FeatureLayout, Role, SchemaSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema: {0}")]
    Schema(String),
    #[error("row {row}, column '{column}': {message}")]
    Parse { row: usize, column: String, message: String },
    #[error("row {row}, column '{column}': unknown category '{value}'")]
    UnknownCategory { row: usize, column: String, value: String },
    #[error("empty dataset")]
    Empty,
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("invalid fold plan: {0}")]
    Folds(String),
}
