use std::sync::OnceLock;

use regex::Regex;

use super::{prompt_version, Statement, StatementSet, StatementSource, UnrollError};
use crate::table::{ParseOptions, Table};

/// Result of parsing an unroll reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse {
    pub statements: StatementSet,
    /// Indices of statements for which no supporting row could be resolved.
    pub unattributed: Vec<usize>,
    /// 1-based positions in the `Rows:` list that matched no table row.
    pub unresolved_rows: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Statements,
    Rows,
    Other,
}

fn item_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:\d+\s*[.)]|[-*•])\s+(.*)$").expect("static regex"))
}

fn citation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\s*\[\s*(?:rows?\s*)?(\d+(?:\s*(?:,|-|–|and)\s*\d+)*)\s*\]")
            .expect("static regex")
    })
}

fn heading(line: &str) -> Option<Section> {
    let cleaned: String = line
        .trim()
        .trim_matches(|c: char| c == '*' || c == '#' || c == '_' || c.is_whitespace())
        .trim_end_matches(':')
        .trim_matches(|c: char| c == '*' || c == '_')
        .to_lowercase();
    match cleaned.as_str() {
        "statements" => Some(Section::Statements),
        "rows" | "supporting rows" => Some(Section::Rows),
        "example bad statements" | "bad statements" => Some(Section::Other),
        _ => None,
    }
}

/// Parses the `Statements:` / `Rows:` reply format.
///
/// Inline bracketed citations such as `[2]` or `[Rows 1-3]` are stripped from
/// the statement text and taken as 1-based table rows. Otherwise each listed
/// row is matched back to the table (case- and whitespace-insensitive), and a
/// statement is attributed to the listed rows sharing the most cell values
/// with it. Without a table no rows can be resolved.
pub fn parse_unroll_response(
    text: &str,
    table: Option<&Table>,
) -> Result<ParsedResponse, UnrollError> {
    let mut section = Section::Preamble;
    let mut saw_statements = false;
    let mut statements: Vec<String> = Vec::new();
    let mut listed_rows: Vec<String> = Vec::new();

    for line in text.lines() {
        if let Some(next) = heading(line) {
            section = next;
            saw_statements |= next == Section::Statements;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let item = item_re().captures(line).map(|c| c[1].trim().to_string());
        match (section, item) {
            (Section::Statements, Some(item)) => statements.push(item),
            (Section::Statements, None) => match statements.last_mut() {
                Some(last) => {
                    last.push(' ');
                    last.push_str(line.trim());
                }
                None => statements.push(line.trim().to_string()),
            },
            (Section::Rows, Some(item)) => listed_rows.push(item),
            (Section::Rows, None) if line.contains('|') => {
                listed_rows.push(line.trim().to_string())
            }
            _ => {}
        }
    }

    if !saw_statements {
        return Err(UnrollError::UnparseableResponse(
            "no \"Statements:\" section".into(),
        ));
    }
    statements.retain(|s| !s.trim().is_empty());
    if statements.is_empty() {
        return Err(UnrollError::UnparseableResponse(
            "\"Statements:\" section is empty".into(),
        ));
    }

    let opts = ParseOptions::default();
    let mut unresolved_rows = Vec::new();
    let mut resolved: Vec<usize> = Vec::new();
    if let Some(table) = table {
        let keys: Vec<Vec<String>> = table
            .rows()
            .iter()
            .map(|r| r.iter().map(|c| match_key(&c.text)).collect())
            .collect();
        for (pos, listed) in listed_rows.iter().enumerate() {
            let cells: Vec<String> = split_listed_row(listed)
                .iter()
                .map(|c| match_key(&opts.cell(c).text))
                .collect();
            let candidates: Vec<usize> = (0..keys.len()).filter(|&i| keys[i] == cells).collect();
            let pick = candidates
                .iter()
                .copied()
                .find(|i| !resolved.contains(i))
                .or(candidates.first().copied());
            match pick {
                Some(i) if !resolved.contains(&i) => resolved.push(i),
                Some(_) => {}
                None => unresolved_rows.push(pos + 1),
            }
        }
    } else {
        unresolved_rows.extend(1..=listed_rows.len());
    }

    let mut out = Vec::with_capacity(statements.len());
    let mut unattributed = Vec::new();
    for (idx, raw) in statements.iter().enumerate() {
        let (text, cited) = strip_citations(raw);
        let rows = if !cited.is_empty() {
            cited
        } else if let Some(table) = table {
            best_matching_rows(table, &resolved, &text)
        } else {
            Vec::new()
        };
        if rows.is_empty() {
            unattributed.push(idx);
        }
        let text = text.replace(['\n', '\r'], " ");
        match Statement::new(text, rows) {
            Ok(s) => out.push(s),
            Err(e) => log::warn!("dropping statement {}: {e}", idx + 1),
        }
    }
    if !unattributed.is_empty() {
        log::warn!(
            "{} of {} statements have no resolvable supporting rows",
            unattributed.len(),
            out.len()
        );
    }

    Ok(ParsedResponse {
        statements: StatementSet {
            statements: out,
            source: StatementSource::Llm,
            prompt_version: Some(prompt_version().to_string()),
        },
        unattributed,
        unresolved_rows,
    })
}

/// Lowercased with all whitespace removed, so "400 m" matches "400m".
fn match_key(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

fn split_listed_row(row: &str) -> Vec<String> {
    let trimmed = row.trim();
    let trimmed = trimmed.strip_prefix('|').unwrap_or(trimmed);
    let trimmed = trimmed.strip_suffix('|').unwrap_or(trimmed);
    trimmed.split('|').map(|c| c.trim().to_string()).collect()
}

/// Removes bracketed citations and returns the 0-based rows they cite.
fn strip_citations(raw: &str) -> (String, Vec<usize>) {
    let mut rows = Vec::new();
    for cap in citation_re().captures_iter(raw) {
        let body = &cap[1];
        let normalized = body.replace("and", ",").replace('–', "-");
        for part in normalized.split(',') {
            let part = part.trim();
            let bounds: Vec<usize> = part
                .split('-')
                .filter_map(|n| n.trim().parse().ok())
                .collect();
            let range = match bounds.as_slice() {
                [a] => *a..=*a,
                [a, b] if a <= b => *a..=*b,
                _ => continue,
            };
            for n in range {
                if n >= 1 && !rows.contains(&(n - 1)) {
                    rows.push(n - 1);
                }
            }
        }
    }
    let text = citation_re().replace_all(raw, "").to_string();
    let text = text
        .replace(" .", ".")
        .replace(" ,", ",")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    (text, rows)
}

/// The resolved rows whose non-empty cell values occur most often in `text`.
fn best_matching_rows(table: &Table, resolved: &[usize], text: &str) -> Vec<usize> {
    let haystack = match_key(text);
    let scores: Vec<(usize, usize)> = resolved
        .iter()
        .map(|&r| {
            let mut values: Vec<String> = table.rows()[r]
                .iter()
                .filter(|c| !c.is_empty)
                .map(|c| match_key(&c.text))
                .collect();
            values.sort();
            values.dedup();
            let hits = values
                .iter()
                .filter(|v| haystack.contains(v.as_str()))
                .count();
            (r, hits)
        })
        .collect();
    let best = scores.iter().map(|&(_, s)| s).max().unwrap_or(0);
    if best == 0 {
        return Vec::new();
    }
    let mut rows: Vec<usize> = scores
        .into_iter()
        .filter(|&(_, s)| s == best)
        .map(|(r, _)| r)
        .collect();
    rows.sort_unstable();
    rows
}
