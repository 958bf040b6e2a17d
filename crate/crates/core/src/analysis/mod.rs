//! Validating metrics against human ratings.

mod comparison;
mod correlate;
mod krippendorff;
mod pearson;

use thiserror::Error;

pub use comparison::{
    model_comparison, model_comparison_from_reports, ComparisonRow, ComparisonTable,
};
pub use correlate::{
    correlate_report, CorrelationCell, CorrelationTable, Dimension, RatingAggregation,
    RatingRecord, POOLED,
};
pub use krippendorff::{krippendorff_alpha, MeasurementLevel};
pub use pearson::pearson;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("missing table: {0}")]
    MissingTable(String),
    #[error("invalid rating: {0}")]
    InvalidRating(String),
}
