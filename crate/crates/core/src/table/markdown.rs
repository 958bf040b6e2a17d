use super::{normalize_text, Cell, ParseOptions, SourceFormat, Table, TableError};

/// Parses the first GitHub-style pipe table found in `text`.
///
/// Lines before the table are ignored and the table ends at the first line
/// without a pipe. Ragged rows are right-padded with empty cells; cells past
/// the header width are dropped with a warning.
pub fn parse_markdown(text: &str, intent: &str, opts: &ParseOptions) -> Result<Table, TableError> {
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<Cell>> = Vec::new();

    for line in text.lines() {
        let Some(cells) = split_pipe_row(line) else {
            if header.is_some() {
                break;
            }
            continue;
        };
        if is_dash_row(&cells) {
            continue;
        }
        match header {
            None => {
                let labels: Vec<String> = cells.iter().map(|c| normalize_text(c)).collect();
                if labels.iter().all(String::is_empty) {
                    return Err(TableError::Malformed("header row is empty".into()));
                }
                header = Some(labels);
            }
            Some(ref h) => {
                let width = h.len();
                if cells.len() > width {
                    let dropped = &cells[width..];
                    if dropped.iter().any(|c| !normalize_text(c).is_empty()) {
                        log::warn!(
                            "markdown row has {} cells, header has {width}; extra cells dropped",
                            cells.len()
                        );
                    }
                }
                let mut row: Vec<Cell> = cells.iter().take(width).map(|c| opts.cell(c)).collect();
                row.resize(width, Cell::empty());
                rows.push(row);
            }
        }
    }

    let header = header.ok_or_else(|| TableError::Malformed("no pipe-delimited row".into()))?;
    Table::new(intent, header, rows, SourceFormat::Markdown)
}

/// Renders a pipe table. Empty cells are written as `NaN`; literal pipes are
/// escaped.
pub fn render_markdown(table: &Table) -> String {
    let mut out = String::new();
    push_row(&mut out, table.column_headers().iter().map(String::as_str));
    out.push('\n');
    out.push('|');
    for _ in 0..table.n_cols() {
        out.push_str("---|");
    }
    for row in table.rows() {
        out.push('\n');
        push_row(
            &mut out,
            row.iter()
                .map(|c| if c.is_empty { "NaN" } else { c.text.as_str() }),
        );
    }
    out
}

fn push_row<'a>(out: &mut String, cells: impl Iterator<Item = &'a str>) {
    out.push('|');
    for cell in cells {
        out.push_str(&cell.replace('|', "\\|"));
        out.push('|');
    }
}

/// Splits a line on unescaped pipes, stripping the optional outer pipes.
/// Returns `None` when the line has no unescaped pipe at all.
fn split_pipe_row(line: &str) -> Option<Vec<String>> {
    let mut cells = Vec::new();
    let mut current = String::new();
    let mut saw_pipe = false;
    let mut chars = line.trim().chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' if chars.peek() == Some(&'|') => {
                current.push('|');
                chars.next();
            }
            '|' => {
                saw_pipe = true;
                cells.push(std::mem::take(&mut current));
            }
            _ => current.push(ch),
        }
    }
    if !saw_pipe {
        return None;
    }
    cells.push(current);
    let trimmed = line.trim();
    if trimmed.starts_with('|') {
        cells.remove(0);
    }
    if trimmed.ends_with('|') && !trimmed.ends_with("\\|") {
        cells.pop();
    }
    Some(cells)
}

/// Delimiter rows (`|---|:--:|`) and rows made only of dashes.
fn is_dash_row(cells: &[String]) -> bool {
    let mut any_dash = false;
    for cell in cells {
        let c = cell.trim();
        if c.is_empty() {
            continue;
        }
        let inner = c.trim_start_matches(':').trim_end_matches(':');
        if inner.is_empty() || !inner.chars().all(|ch| ch == '-') {
            return false;
        }
        any_dash = true;
    }
    any_dash
}
