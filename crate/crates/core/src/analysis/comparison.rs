use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::{BaselineMetric, MacroScores, MetricReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: String,
    /// Aligned with [`ComparisonTable::columns`]; percentages.
    pub values: Vec<f64>,
}

/// Models x metrics, corpus macro scores scaled to percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn value(&self, model_id: &str, column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.rows
            .iter()
            .find(|r| r.model_id == model_id)
            .map(|r| r.values[col])
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16}", "model")?;
        for c in &self.columns {
            write!(f, " {c:>10}")?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:<16}", row.model_id)?;
            for v in &row.values {
                write!(f, " {v:>10.2}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn column_name(m: BaselineMetric) -> &'static str {
    match m {
        BaselineMetric::Exact => "E",
        BaselineMetric::Chrf => "chrF",
        BaselineMetric::Embedding => "BS",
    }
}

fn build(models: Vec<(String, &MacroScores)>, baselines: &[BaselineMetric]) -> ComparisonTable {
    let mut baselines = baselines.to_vec();
    baselines.sort();
    baselines.dedup();
    let mut columns: Vec<String> = baselines
        .iter()
        .map(|m| column_name(*m).to_string())
        .collect();
    columns.extend(["TabEval-P", "TabEval-R", "TabEval-F1"].map(String::from));
    let rows = models
        .into_iter()
        .map(|(model_id, scores)| {
            let mut values: Vec<f64> = baselines
                .iter()
                .map(|m| scores.baselines.get(m).map_or(0.0, |s| s.f1) * 100.0)
                .collect();
            values.extend([
                scores.tabeval.precision * 100.0,
                scores.tabeval.recall * 100.0,
                scores.tabeval.f1 * 100.0,
            ]);
            ComparisonRow { model_id, values }
        })
        .collect();
    ComparisonTable { columns, rows }
}

/// One row per model in a multi-model report. Baseline columns show F1.
pub fn model_comparison(report: &MetricReport) -> ComparisonTable {
    build(
        report
            .models
            .iter()
            .map(|m| (m.model_id.clone(), &m.macro_scores))
            .collect(),
        &report.settings.baselines,
    )
}

/// One row per report, using each report's overall macro scores.
pub fn model_comparison_from_reports(reports: &BTreeMap<String, MetricReport>) -> ComparisonTable {
    let mut baselines: Vec<BaselineMetric> = reports
        .values()
        .flat_map(|r| r.settings.baselines.iter().copied())
        .collect();
    baselines.sort();
    baselines.dedup();
    build(
        reports
            .iter()
            .map(|(id, r)| (id.clone(), &r.overall))
            .collect(),
        &baselines,
    )
}
