//! Canonical table model shared by the unrollers and the record-based baselines.
//!
//! Tables arrive either as GitHub-style pipe tables or as a small HTML subset.
//! Both parsers produce the same rectangular [`Table`]: spans are expanded,
//! stacked headers are flattened, and every cell is whitespace-normalized.

mod html;
mod markdown;
mod records;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use html::parse_html;
pub use markdown::{parse_markdown, render_markdown};
pub use records::{extract_records, Record, RecordKind};

/// Separator used when flattening stacked header rows into one label.
pub const HEADER_JOIN: &str = " — ";

/// Tokens (compared case-insensitively) that mark a cell as empty.
pub const DEFAULT_EMPTY_TOKENS: &[&str] = &["nan", "n/a", "-", "—", ""];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("malformed table: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Html,
    Markdown,
}

/// Parser configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    empty_tokens: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self::with_empty_tokens(DEFAULT_EMPTY_TOKENS.iter().copied())
    }
}

impl ParseOptions {
    pub fn with_empty_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut empty_tokens: Vec<String> = tokens
            .into_iter()
            .map(|t| normalize_text(t.as_ref()).to_lowercase())
            .collect();
        // the blank cell is always empty regardless of configuration
        if !empty_tokens.iter().any(String::is_empty) {
            empty_tokens.push(String::new());
        }
        Self { empty_tokens }
    }

    pub fn empty_tokens(&self) -> &[String] {
        &self.empty_tokens
    }

    pub fn is_empty_token(&self, normalized: &str) -> bool {
        let lower = normalized.to_lowercase();
        self.empty_tokens.contains(&lower)
    }

    /// Builds a cell from raw text: whitespace is normalized and empty
    /// markers collapse to the canonical blank cell.
    pub fn cell(&self, raw: &str) -> Cell {
        let text = normalize_text(raw);
        if self.is_empty_token(&text) {
            Cell::empty()
        } else {
            Cell {
                text,
                is_empty: false,
            }
        }
    }
}

/// A single grid position. Empty cells always carry `""` so that tables
/// compare equal regardless of which empty marker the source used.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub text: String,
    pub is_empty: bool,
}

impl Cell {
    pub fn empty() -> Self {
        Self {
            text: String::new(),
            is_empty: true,
        }
    }

    /// Convenience constructor using the default empty-token set.
    pub fn new(raw: &str) -> Self {
        ParseOptions::default().cell(raw)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Table {
    pub intent: String,
    column_headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
    pub source_format: SourceFormat,
}

impl Table {
    /// Builds a table, enforcing rectangularity and non-empty headers.
    pub fn new(
        intent: impl Into<String>,
        column_headers: Vec<String>,
        rows: Vec<Vec<Cell>>,
        source_format: SourceFormat,
    ) -> Result<Self, TableError> {
        if column_headers.is_empty() {
            return Err(TableError::Malformed("table has no columns".into()));
        }
        let width = column_headers.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(TableError::Malformed(format!(
                "row {i} has {} cells, expected {width}",
                row.len()
            )));
        }
        Ok(Self {
            intent: normalize_text(&intent.into()),
            column_headers: column_headers.iter().map(|h| normalize_text(h)).collect(),
            rows,
            source_format,
        })
    }

    /// Builds a markdown-format table from plain strings using the default
    /// empty-token set. Mostly useful for fixtures.
    pub fn from_strings<H, R, C>(intent: &str, headers: H, rows: R) -> Result<Self, TableError>
    where
        H: IntoIterator,
        H::Item: AsRef<str>,
        R: IntoIterator<Item = C>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        let opts = ParseOptions::default();
        let headers = headers
            .into_iter()
            .map(|h| h.as_ref().to_string())
            .collect();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| opts.cell(c.as_ref())).collect())
            .collect();
        Self::new(intent, headers, rows, SourceFormat::Markdown)
    }

    pub fn column_headers(&self) -> &[String] {
        &self.column_headers
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_headers.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    /// Same table with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.rows.len(), "permutation length mismatch");
        let rows = order.iter().map(|&i| self.rows[i].clone()).collect();
        Self {
            rows,
            ..self.clone()
        }
    }

    /// Grid and intent equality, ignoring the source format.
    pub fn same_content(&self, other: &Table) -> bool {
        self.intent == other.intent
            && self.column_headers == other.column_headers
            && self.rows == other.rows
    }

    /// Parses `text` as HTML when it looks like markup, markdown otherwise.
    pub fn parse_auto(text: &str, intent: &str) -> Result<Self, TableError> {
        if text.to_ascii_lowercase().contains("<table") {
            parse_html(text, intent, &ParseOptions::default())
        } else {
            parse_markdown(text, intent, &ParseOptions::default())
        }
    }
}

/// Collapses internal whitespace runs to one space and trims both ends.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
