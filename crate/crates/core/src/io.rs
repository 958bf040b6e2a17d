//! JSONL record types and file helpers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Serialize(String),
}

/// One reference table with its source text and intent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub intent: String,
    /// HTML or markdown.
    pub table: String,
}

/// One generated table. Markdown with `NaN` for empty cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default = "default_model")]
    pub model_id: String,
    pub table: String,
}

fn default_model() -> String {
    "default".into()
}

/// Parses JSONL text. Blank lines are skipped; errors carry the 1-based
/// line number.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, IoError> {
    parse_jsonl_with(text, |_: &T| Ok(()))
}

/// Like [`parse_jsonl`] with a per-record validation hook.
pub fn parse_jsonl_with<T: DeserializeOwned>(
    text: &str,
    validate: impl Fn(&T) -> Result<(), String>,
) -> Result<Vec<T>, IoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(line).map_err(|e| IoError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        validate(&rec).map_err(|message| IoError::Line {
            line: i + 1,
            message,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    parse_jsonl(&read_text(path)?)
}

/// One compact JSON object per line, newline-terminated.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String, IoError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| IoError::Serialize(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let wrap = |source| IoError::File {
        path: path.display().to_string(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(wrap)?;
    file.write_all(bytes).map_err(wrap)?;
    file.sync_all().map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)
}
