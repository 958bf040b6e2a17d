//! Turning tables into lists of atomic statements.
//!
//! Two sources exist: a deterministic unroller that applies the primary-key
//! anchoring rules mechanically, and an LLM unroller that sends the few-shot
//! prompt to a completion backend and parses the reply. Both produce a
//! [`StatementSet`] whose statements cite the rows they were built from.

mod anchor;
mod attribution;
mod cache;
mod deterministic;
mod llm;
mod prompt;
mod response;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::Table;

pub use anchor::{detect_anchor, AnchorChoice, DEFAULT_MAX_ANCHOR_COLUMNS};
pub use attribution::{validate_attribution, AttributionFlag, AttributionMode, AttributionReport};
pub use cache::{CacheEntry, UnrollCache, UnrollCacheKey};
pub use deterministic::{unroll_deterministic, DeterministicUnroller};
pub use llm::{
    unroll_llm, CompletionClient, HttpCompletionClient, LlmSettings, LlmUnroller, TransportError,
    API_KEY_ENV,
};
pub use prompt::{build_unroll_prompt, prompt_template, prompt_version, RETRY_NUDGE};
pub use response::{parse_unroll_response, ParsedResponse};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnrollError {
    #[error("table has no data rows")]
    EmptyTable,
    #[error("unparseable unroll response: {0}")]
    UnparseableResponse(String),
    #[error("completion backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("invalid statement: {0}")]
    InvalidStatement(String),
    #[error("unroll cache error: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    text: String,
    pub supporting_rows: Vec<usize>,
}

impl Statement {
    /// Text must be non-empty and single-line.
    pub fn new(text: impl Into<String>, supporting_rows: Vec<usize>) -> Result<Self, UnrollError> {
        let text = text.into();
        let text = text.trim();
        if text.is_empty() {
            return Err(UnrollError::InvalidStatement("empty text".into()));
        }
        if text.contains(['\n', '\r']) {
            return Err(UnrollError::InvalidStatement(format!(
                "multi-line text: {text:?}"
            )));
        }
        Ok(Self {
            text: text.to_string(),
            supporting_rows,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementSource {
    Deterministic,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementSet {
    pub statements: Vec<Statement>,
    pub source: StatementSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_version: Option<String>,
}

impl StatementSet {
    pub fn deterministic(statements: Vec<Statement>) -> Self {
        Self {
            statements,
            source: StatementSource::Deterministic,
            prompt_version: None,
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.statements.iter().map(Statement::text)
    }
}

/// Anything that can unroll a table. Implementations must be shareable
/// across worker threads.
pub trait Unroller: Send + Sync {
    fn unroll(&self, table: &Table) -> Result<StatementSet, UnrollError>;

    /// Short label recorded in reports.
    fn name(&self) -> String;
}
