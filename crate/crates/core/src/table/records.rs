use serde::{Deserialize, Serialize};

use super::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Pair,
    Triple,
}

/// A cell seen through its row header: `(row_key, value)` for pairs and
/// `(row_key, col_header, value)` for triples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record {
    pub kind: RecordKind,
    pub row_key: String,
    pub col_header: String,
    pub value: String,
}

impl Record {
    pub fn pair(row_key: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            kind: RecordKind::Pair,
            row_key: row_key.into(),
            col_header: String::new(),
            value: value.into(),
        }
    }

    pub fn triple(
        row_key: impl Into<String>,
        col_header: impl Into<String>,
        value: impl Into<String>,
    ) -> Self {
        Self {
            kind: RecordKind::Triple,
            row_key: row_key.into(),
            col_header: col_header.into(),
            value: value.into(),
        }
    }

    /// Fields joined by `" | "`; this is the string the baseline matchers see.
    pub fn text(&self) -> String {
        match self.kind {
            RecordKind::Pair => format!("{} | {}", self.row_key, self.value),
            RecordKind::Triple => {
                format!("{} | {} | {}", self.row_key, self.col_header, self.value)
            }
        }
    }
}

/// Extracts records with the leftmost column as row header. Empty cells
/// produce nothing. A one-column table has no cells outside the row header
/// and so yields no records.
pub fn extract_records(table: &Table, kind: RecordKind) -> Vec<Record> {
    let headers = table.column_headers();
    let mut out = Vec::new();
    for row in table.rows() {
        let key = &row[0].text;
        for (col, cell) in row.iter().enumerate().skip(1) {
            if cell.is_empty {
                continue;
            }
            out.push(match kind {
                RecordKind::Pair => Record::pair(key.clone(), cell.text.clone()),
                RecordKind::Triple => {
                    Record::triple(key.clone(), headers[col].clone(), cell.text.clone())
                }
            });
        }
    }
    out
}
