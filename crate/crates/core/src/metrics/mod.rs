//! Statement-level precision/recall/F1, record-matching baselines and
//! corpus aggregation.

mod aggregate;
mod baseline;
mod chrf;
mod corpus;
mod embedding;
mod pipeline;

use thiserror::Error;

use crate::entail::EntailError;
use crate::table::TableError;
use crate::unroll::UnrollError;

pub use aggregate::{aggregate_precision, aggregate_recall, f1, TableScore};
pub use baseline::{
    baseline_from_texts, baseline_score, BaselineMetric, BaselineScore, EmbedConfig,
};
pub use chrf::{chrf, chrf_with, CHRF_BETA, CHRF_MAX_ORDER};
pub use corpus::{
    evaluate_corpus, CorpusConfig, EntryStatus, MacroScores, MetricReport, ModelSummary, PrfScore,
    ReportSettings, TableEntry,
};
pub use embedding::{greedy_match_f1, RemoteEmbedder, TokenEmbedder, TokenVectors};
pub use pipeline::{
    score_statement_sets, tabeval_score, unroll_checked, DirectionPolicy, TabEvalOptions,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Unroll(#[from] UnrollError),
    #[error(transparent)]
    Entail(#[from] EntailError),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("configuration error: {0}")]
    Config(String),
}
