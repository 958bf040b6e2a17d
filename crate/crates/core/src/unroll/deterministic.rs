use super::anchor::{detect_anchor, AnchorChoice, DEFAULT_MAX_ANCHOR_COLUMNS};
use super::{Statement, StatementSet, UnrollError, Unroller};
use crate::table::Table;

/// Placeholder for an empty anchor value inside an anchor phrase.
const EMPTY_VALUE: &str = "empty";

/// Unrolls a table with the minimal row-unique anchor.
///
/// Statements are emitted row by row, columns ascending:
/// a multi-column anchor first yields an existence statement per row, then
/// every non-anchor non-empty cell yields one fact statement. A row that would
/// otherwise yield nothing gets an existence statement.
pub fn unroll_deterministic(table: &Table) -> Result<StatementSet, UnrollError> {
    DeterministicUnroller::default().unroll(table)
}

#[derive(Debug, Clone)]
pub struct DeterministicUnroller {
    pub max_anchor_columns: usize,
}

impl Default for DeterministicUnroller {
    fn default() -> Self {
        Self {
            max_anchor_columns: DEFAULT_MAX_ANCHOR_COLUMNS,
        }
    }
}

impl Unroller for DeterministicUnroller {
    fn unroll(&self, table: &Table) -> Result<StatementSet, UnrollError> {
        if table.n_rows() == 0 {
            return Err(UnrollError::EmptyTable);
        }
        let anchor = detect_anchor(table, self.max_anchor_columns);
        let mut statements = Vec::new();
        for row in 0..table.n_rows() {
            let before = statements.len();
            let phrase = anchor_phrase(table, &anchor, row);
            let multi = anchor.column_indices.len() > 1;
            if multi {
                statements.push(existence(table, &phrase, row)?);
            }
            for col in 0..table.n_cols() {
                let cell = table.cell(row, col);
                if anchor.contains(col) || cell.is_empty {
                    continue;
                }
                let text = match table.intent.is_empty() {
                    true => format!(
                        "For {phrase}, the {} is {}.",
                        header_label(table, col),
                        cell.text
                    ),
                    false => format!(
                        "For {phrase} in {}, the {} is {}.",
                        table.intent,
                        header_label(table, col),
                        cell.text
                    ),
                };
                statements.push(Statement::new(text, vec![row])?);
            }
            if statements.len() == before {
                statements.push(existence(table, &phrase, row)?);
            }
        }
        Ok(StatementSet::deterministic(statements))
    }

    fn name(&self) -> String {
        "deterministic".into()
    }
}

fn existence(table: &Table, phrase: &str, row: usize) -> Result<Statement, UnrollError> {
    let text = if table.intent.is_empty() {
        format!("There is {phrase}.")
    } else {
        format!("In {}, there is {phrase}.", table.intent)
    };
    Statement::new(text, vec![row])
}

fn header_label(table: &Table, col: usize) -> String {
    let h = &table.column_headers()[col];
    if h.is_empty() {
        format!("column {}", col + 1)
    } else {
        h.clone()
    }
}

fn anchor_value(table: &Table, row: usize, col: usize) -> &str {
    let cell = table.cell(row, col);
    if cell.is_empty {
        EMPTY_VALUE
    } else {
        &cell.text
    }
}

fn anchor_phrase(table: &Table, anchor: &AnchorChoice, row: usize) -> String {
    match anchor.column_indices.as_slice() {
        [col] => format!(
            "the {} {}",
            header_label(table, *col),
            anchor_value(table, row, *col)
        ),
        cols => {
            let parts: Vec<String> = cols
                .iter()
                .map(|&c| {
                    format!(
                        "{} is {}",
                        header_label(table, c),
                        anchor_value(table, row, c)
                    )
                })
                .collect();
            format!("the row where {}", parts.join(" and "))
        }
    }
}
