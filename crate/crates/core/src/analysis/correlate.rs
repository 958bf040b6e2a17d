use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pearson::pearson;
use super::AnalysisError;
use crate::metrics::{BaselineMetric, MetricReport, TableEntry};

/// Scope label for correlations pooled across models.
pub const POOLED: &str = "all";

/// One rater's judgments of one generated table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub table_id: String,
    pub model_id: String,
    pub rater_id: String,
    pub overall: i64,
    pub correctness: i64,
    pub completeness: i64,
}

impl RatingRecord {
    /// All three ratings must lie in 1..=5.
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("overall", self.overall),
            ("correctness", self.correctness),
            ("completeness", self.completeness),
        ] {
            if !(1..=5).contains(&v) {
                return Err(format!("{name} rating {v} outside 1-5"));
            }
        }
        Ok(())
    }

    pub fn get(&self, dim: Dimension) -> i64 {
        match dim {
            Dimension::Correctness => self.correctness,
            Dimension::Completeness => self.completeness,
            Dimension::Overall => self.overall,
        }
    }
}

/// Human rating dimension. Each is paired with one metric component:
/// correctness with precision, completeness with recall, overall with F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Correctness,
    Completeness,
    Overall,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Self::Correctness, Self::Completeness, Self::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Correctness => "correctness",
            Self::Completeness => "completeness",
            Self::Overall => "overall",
        }
    }

    pub fn metric_component(self) -> &'static str {
        match self {
            Self::Correctness => "precision",
            Self::Completeness => "recall",
            Self::Overall => "f1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingAggregation {
    #[default]
    MeanOverRaters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    /// `tabeval` or a baseline metric name.
    pub metric: String,
    /// A model id, or [`POOLED`].
    pub model: String,
    pub dimension: Dimension,
    pub n: usize,
    /// `None` when the correlation is undefined (constant input, n < 2).
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CorrelationTable {
    pub cells: Vec<CorrelationCell>,
}

impl CorrelationTable {
    pub fn get(&self, metric: &str, model: &str, dim: Dimension) -> Option<&CorrelationCell> {
        self.cells
            .iter()
            .find(|c| c.metric == metric && c.model == model && c.dimension == dim)
    }
}

impl fmt::Display for CorrelationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:<16} {:<13} {:>5} {:>8}",
            "metric", "model", "dimension", "n", "r"
        )?;
        for c in &self.cells {
            let r = c.r.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
            writeln!(
                f,
                "{:<12} {:<16} {:<13} {:>5} {:>8}",
                c.metric,
                c.model,
                c.dimension.as_str(),
                c.n,
                r
            )?;
        }
        Ok(())
    }
}

fn component(entry: &TableEntry, metric: Option<BaselineMetric>, dim: Dimension) -> f64 {
    let (p, r, f) = match metric {
        None => (
            entry.tabeval.precision,
            entry.tabeval.recall,
            entry.tabeval.f1,
        ),
        Some(m) => entry
            .baseline(m)
            .map_or((0.0, 0.0, 0.0), |b| (b.precision, b.recall, b.f1)),
    };
    match dim {
        Dimension::Correctness => p,
        Dimension::Completeness => r,
        Dimension::Overall => f,
    }
}

/// Correlates metric scores with mean human ratings, per model and pooled.
///
/// Every rated (model, table) must have an entry in `report`. Cells whose
/// correlation is undefined carry `r: None` and a note.
pub fn correlate_report(
    report: &MetricReport,
    ratings: &[RatingRecord],
    _aggregation: RatingAggregation,
) -> Result<CorrelationTable, AnalysisError> {
    // (model, table) -> ratings sorted by rater for order-independent sums
    let mut grouped: BTreeMap<(&str, &str), Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        r.validate().map_err(AnalysisError::InvalidRating)?;
        grouped
            .entry((r.model_id.as_str(), r.table_id.as_str()))
            .or_default()
            .push(r);
    }

    struct Item<'a> {
        model: &'a str,
        entry: &'a TableEntry,
        human: [f64; 3],
    }
    let mut items = Vec::with_capacity(grouped.len());
    for ((model, table), mut group) in grouped {
        let entry = report.entry(model, table).ok_or_else(|| {
            AnalysisError::MissingTable(format!("{table} (model {model}) is not in the report"))
        })?;
        group.sort_by(|a, b| {
            (
                a.rater_id.as_str(),
                a.overall,
                a.correctness,
                a.completeness,
            )
                .cmp(&(
                    b.rater_id.as_str(),
                    b.overall,
                    b.correctness,
                    b.completeness,
                ))
        });
        let mut human = [0.0; 3];
        for (slot, dim) in human.iter_mut().zip(Dimension::ALL) {
            *slot = group.iter().map(|r| r.get(dim) as f64).sum::<f64>() / group.len() as f64;
        }
        items.push(Item {
            model,
            entry,
            human,
        });
    }

    let mut families: Vec<(String, Option<BaselineMetric>)> = vec![("tabeval".into(), None)];
    families.extend(
        report
            .settings
            .baselines
            .iter()
            .map(|m| (m.as_str().to_string(), Some(*m))),
    );
    let mut scopes: Vec<&str> = items.iter().map(|i| i.model).collect();
    scopes.dedup();
    scopes.push(POOLED);

    let mut cells = Vec::new();
    for (name, metric) in &families {
        for scope in &scopes {
            let chosen: Vec<&Item> = items
                .iter()
                .filter(|i| *scope == POOLED || i.model == *scope)
                .collect();
            for (d, dim) in Dimension::ALL.into_iter().enumerate() {
                let xs: Vec<f64> = chosen
                    .iter()
                    .map(|i| component(i.entry, *metric, dim))
                    .collect();
                let ys: Vec<f64> = chosen.iter().map(|i| i.human[d]).collect();
                let (r, note) = match pearson(&xs, &ys) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                cells.push(CorrelationCell {
                    metric: name.clone(),
                    model: scope.to_string(),
                    dimension: dim,
                    n: chosen.len(),
                    r,
                    note,
                });
            }
        }
    }
    Ok(CorrelationTable { cells })
}
