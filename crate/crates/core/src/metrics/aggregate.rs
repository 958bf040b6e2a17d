use serde::{Deserialize, Serialize};

use crate::entail::EntailmentMatrix;

/// Precision/recall/F1 for one table pair plus statement counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl TableScore {
    pub fn new(precision: f64, recall: f64, n_pred: usize, n_gold: usize) -> Self {
        Self {
            precision,
            recall,
            f1: f1(precision, recall),
            n_pred,
            n_gold,
        }
    }

    pub fn zero(n_pred: usize, n_gold: usize) -> Self {
        Self::new(0.0, 0.0, n_pred, n_gold)
    }

    pub fn perfect(n_pred: usize, n_gold: usize) -> Self {
        Self::new(1.0, 1.0, n_pred, n_gold)
    }
}

/// Mean over predicted statements of the best score against any gold one.
pub fn aggregate_precision(matrix: &EntailmentMatrix) -> f64 {
    let rows = matrix.rows();
    let total: f64 = rows
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    total / rows.len() as f64
}

/// Mean over gold statements of the best score against any predicted one.
pub fn aggregate_recall(matrix: &EntailmentMatrix) -> f64 {
    let rows = matrix.rows();
    let mut col_max = vec![f64::NEG_INFINITY; matrix.n_gold()];
    for row in rows {
        for (best, &v) in col_max.iter_mut().zip(row) {
            *best = best.max(v);
        }
    }
    col_max.iter().sum::<f64>() / col_max.len() as f64
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    let denom = precision + recall;
    if denom > 0.0 {
        2.0 * precision * recall / denom
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entail::Direction;

    fn m(values: Vec<Vec<f64>>) -> EntailmentMatrix {
        EntailmentMatrix::new(values, Direction::GoldEntailsPred).unwrap()
    }

    #[test]
    fn worked_fixture() {
        let mat = m(vec![vec![0.9, 0.2], vec![0.1, 0.8], vec![0.4, 0.3]]);
        assert!((aggregate_precision(&mat) - 0.7).abs() < 1e-12);
        assert!((aggregate_recall(&mat) - 0.85).abs() < 1e-12);
        assert!((f1(0.7, 0.85) - 1.19 / 1.55).abs() < 1e-12);
    }

    #[test]
    fn degenerate_shapes() {
        assert_eq!(aggregate_precision(&m(vec![vec![1.0; 4]; 3])), 1.0);
        assert_eq!(aggregate_recall(&m(vec![vec![0.0; 2]; 5])), 0.0);
        assert_eq!(aggregate_precision(&m(vec![vec![0.42]])), 0.42);
        assert_eq!(
            aggregate_recall(&m(vec![vec![0.1], vec![0.7], vec![0.3]])),
            0.7
        );
    }

    #[test]
    fn f1_edges() {
        assert_eq!(f1(1.0, 1.0), 1.0);
        assert_eq!(f1(0.0, 0.9), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }
}
