use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::table::Table;

pub const DEFAULT_MAX_ANCHOR_COLUMNS: usize = 3;

/// Columns whose joint values identify each row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorChoice {
    pub column_indices: Vec<usize>,
    /// No subset within the size cap was row-unique; every column is used.
    pub exhaustive: bool,
}

impl AnchorChoice {
    pub fn contains(&self, col: usize) -> bool {
        self.column_indices.contains(&col)
    }
}

/// Finds the smallest row-unique column subset.
///
/// Subsets are tried by ascending size up to `max_columns`, and within one
/// size in lexicographic index order; the first unique one wins. Empty cells
/// take part with value `""`.
pub fn detect_anchor(table: &Table, max_columns: usize) -> AnchorChoice {
    let n_cols = table.n_cols();
    for k in 1..=max_columns.min(n_cols) {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if is_row_unique(table, &combo) {
                return AnchorChoice {
                    column_indices: combo,
                    exhaustive: false,
                };
            }
            if !next_combination(&mut combo, n_cols) {
                break;
            }
        }
    }
    AnchorChoice {
        column_indices: (0..n_cols).collect(),
        exhaustive: true,
    }
}

pub(crate) fn is_row_unique(table: &Table, cols: &[usize]) -> bool {
    let mut seen = HashSet::with_capacity(table.n_rows());
    table.rows().iter().all(|row| {
        let key: Vec<&str> = cols.iter().map(|&c| row[c].text.as_str()).collect();
        seen.insert(key)
    })
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
