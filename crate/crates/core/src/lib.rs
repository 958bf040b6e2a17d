//! Semantic evaluation of generated tables.
//!
//! Tables are unrolled into atomic statements, predicted and reference
//! statements are scored pairwise with a directional entailment scorer, and
//! the best matches are averaged into precision, recall and F1. Record-based
//! baselines (exact match, chrF, embedding similarity) and correlation
//! analysis against human ratings sit alongside.

pub mod analysis;
pub mod entail;
mod http;
pub mod io;
pub mod metrics;
pub mod table;
pub mod unroll;

pub use entail::{build_scorer, Backend, Direction, EntailmentScorer, ScorerConfig};
pub use metrics::{tabeval_score, MetricError, MetricReport, TableScore};
pub use table::{parse_html, parse_markdown, render_markdown, ParseOptions, Table};
pub use unroll::{unroll_deterministic, StatementSet, Unroller};
