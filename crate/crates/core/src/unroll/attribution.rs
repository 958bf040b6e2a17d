use serde::{Deserialize, Serialize};

use super::StatementSet;
use crate::table::Table;

/// Function words and the deterministic templates' own vocabulary. These
/// never count as evidence of hallucination.
const IGNORED_TOKENS: &[&str] = &[
    "the", "for", "there", "row", "where", "and", "column", "empty", "was", "were", "are", "has",
    "had", "have", "with", "from", "that", "this", "which", "who", "its", "their", "his", "her",
    "into", "onto", "than", "then", "also", "both", "each", "all", "any", "not", "but", "been",
    "being", "is", "of", "in", "on", "at", "to", "by", "an", "as",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributionMode {
    /// Flag unsupported statements but keep them.
    #[default]
    Report,
    /// Drop flagged statements from the set.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionFlag {
    /// Position in the input set.
    pub index: usize,
    pub statement: String,
    /// Tokens of length >= 3 not found anywhere in the table or intent.
    pub unsupported_tokens: Vec<String>,
    /// Cited rows past the end of the table.
    pub out_of_range_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub flags: Vec<AttributionFlag>,
    /// The input set, minus flagged statements in strict mode.
    pub statements: StatementSet,
}

impl AttributionReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Checks each statement against the table's text: every alphanumeric token
/// of at least three characters must occur (case-insensitively) in the
/// intent, headers or cells.
pub fn validate_attribution(
    statements: &StatementSet,
    table: &Table,
    mode: AttributionMode,
) -> AttributionReport {
    let mut haystack = table.intent.to_lowercase();
    for h in table.column_headers() {
        haystack.push('\n');
        haystack.push_str(&h.to_lowercase());
    }
    for row in table.rows() {
        for cell in row {
            haystack.push('\n');
            haystack.push_str(&cell.text.to_lowercase());
        }
    }

    let mut flags = Vec::new();
    let mut kept = Vec::new();
    for (index, st) in statements.statements.iter().enumerate() {
        let mut unsupported: Vec<String> = Vec::new();
        for token in st
            .text()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= 3)
        {
            let lower = token.to_lowercase();
            if IGNORED_TOKENS.contains(&lower.as_str()) || haystack.contains(&lower) {
                continue;
            }
            if !unsupported.contains(&lower) {
                unsupported.push(lower);
            }
        }
        let out_of_range: Vec<usize> = st
            .supporting_rows
            .iter()
            .copied()
            .filter(|&r| r >= table.n_rows())
            .collect();
        if unsupported.is_empty() && out_of_range.is_empty() {
            kept.push(st.clone());
            continue;
        }
        if mode == AttributionMode::Report {
            kept.push(st.clone());
        }
        flags.push(AttributionFlag {
            index,
            statement: st.text().to_string(),
            unsupported_tokens: unsupported,
            out_of_range_rows: out_of_range,
        });
    }

    AttributionReport {
        flags,
        statements: StatementSet {
            statements: kept,
            ..statements.clone()
        },
    }
}
