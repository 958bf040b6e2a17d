use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementLevel {
    Nominal,
    #[default]
    Ordinal,
    Interval,
}

/// Krippendorff's alpha via the coincidence matrix.
///
/// `ratings[r][u]` is rater `r`'s value for item `u`; `None` marks a missing
/// rating. Items with fewer than two ratings are not pairable and are
/// ignored.
pub fn krippendorff_alpha(
    ratings: &[Vec<Option<f64>>],
    level: MeasurementLevel,
) -> Result<f64, AnalysisError> {
    let n_items = ratings.iter().map(Vec::len).max().unwrap_or(0);
    let units: Vec<Vec<f64>> = (0..n_items)
        .map(|u| {
            ratings
                .iter()
                .filter_map(|row| row.get(u).copied().flatten())
                .collect::<Vec<f64>>()
        })
        .filter(|vals| vals.len() >= 2)
        .collect();
    if units.is_empty() {
        return Err(AnalysisError::DegenerateInput(
            "no item has ratings from two raters".into(),
        ));
    }

    let mut values: Vec<f64> = units.iter().flatten().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::DegenerateInput("non-finite rating".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.len() < 2 {
        return Err(AnalysisError::DegenerateInput(
            "fewer than two distinct values".into(),
        ));
    }
    let k = values.len();
    let index = |v: f64| values.iter().position(|&x| x == v).expect("value present");

    let mut coincidence = vec![vec![0.0f64; k]; k];
    for unit in &units {
        let weight = 1.0 / (unit.len() - 1) as f64;
        for (i, &a) in unit.iter().enumerate() {
            for (j, &b) in unit.iter().enumerate() {
                if i != j {
                    coincidence[index(a)][index(b)] += weight;
                }
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let total: f64 = marginals.iter().sum();

    let delta = |c: usize, d: usize| -> f64 {
        match level {
            MeasurementLevel::Nominal => f64::from(u8::from(c != d)),
            MeasurementLevel::Interval => (values[c] - values[d]).powi(2),
            MeasurementLevel::Ordinal => {
                let (lo, hi) = (c.min(d), c.max(d));
                let span: f64 = marginals[lo..=hi].iter().sum();
                (span - (marginals[c] + marginals[d]) / 2.0).powi(2)
            }
        }
    };

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let dist = delta(c, d);
            observed += coincidence[c][d] * dist;
            expected += marginals[c] * marginals[d] * dist;
        }
    }
    if expected == 0.0 {
        return Err(AnalysisError::DegenerateInput(
            "no expected disagreement".into(),
        ));
    }
    Ok(1.0 - (total - 1.0) * observed / expected)
}
