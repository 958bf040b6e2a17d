use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::aggregate::f1;
use super::chrf::chrf;
use super::embedding::{greedy_match_f1, TokenEmbedder, TokenVectors};
use super::MetricError;
use crate::entail::exact_score;
use crate::table::{extract_records, RecordKind, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMetric {
    Exact,
    Chrf,
    Embedding,
}

impl BaselineMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Chrf => "chrf",
            Self::Embedding => "embedding",
        }
    }
}

impl std::str::FromStr for BaselineMetric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "e" => Ok(Self::Exact),
            "chrf" => Ok(Self::Chrf),
            "embedding" | "bs" | "bertscore" => Ok(Self::Embedding),
            other => Err(MetricError::Config(format!(
                "unknown baseline metric {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineScore {
    pub metric: BaselineMetric,
    pub record_mode: RecordKind,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BaselineScore {
    pub fn new(
        metric: BaselineMetric,
        record_mode: RecordKind,
        precision: f64,
        recall: f64,
    ) -> Self {
        Self {
            metric,
            record_mode,
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

/// Embedding backend plus optional affine rescaling constant.
#[derive(Clone, Copy)]
pub struct EmbedConfig<'a> {
    pub embedder: &'a dyn TokenEmbedder,
    pub rescale_baseline: Option<f64>,
}

/// Record-matching baseline: every predicted record takes its best
/// similarity against the gold records (precision), every gold record its
/// best against the predicted ones (recall).
pub fn baseline_score(
    gold: &Table,
    pred: &Table,
    metric: BaselineMetric,
    record_mode: RecordKind,
    embed: Option<EmbedConfig<'_>>,
) -> Result<BaselineScore, MetricError> {
    let gold_texts: Vec<String> = extract_records(gold, record_mode)
        .iter()
        .map(|r| r.text())
        .collect();
    let pred_texts: Vec<String> = extract_records(pred, record_mode)
        .iter()
        .map(|r| r.text())
        .collect();
    baseline_from_texts(&gold_texts, &pred_texts, metric, record_mode, embed)
}

/// Same as [`baseline_score`] over already-joined record strings.
pub fn baseline_from_texts(
    gold: &[String],
    pred: &[String],
    metric: BaselineMetric,
    record_mode: RecordKind,
    embed: Option<EmbedConfig<'_>>,
) -> Result<BaselineScore, MetricError> {
    match (gold.is_empty(), pred.is_empty()) {
        (true, true) => return Ok(BaselineScore::new(metric, record_mode, 1.0, 1.0)),
        (_, true) | (true, _) => return Ok(BaselineScore::new(metric, record_mode, 0.0, 0.0)),
        _ => {}
    }

    let sims: Vec<Vec<f64>> = match metric {
        BaselineMetric::Exact => grid(pred, gold, |p, g| exact_score(g, p)),
        BaselineMetric::Chrf => grid(pred, gold, chrf),
        BaselineMetric::Embedding => {
            let embed = embed.ok_or_else(|| {
                MetricError::Config("embedding baseline needs an embedder".into())
            })?;
            let mut unique: Vec<String> = gold.iter().chain(pred).cloned().collect();
            unique.sort();
            unique.dedup();
            let vectors = embed
                .embedder
                .embed(&unique)
                .map_err(MetricError::BackendUnavailable)?;
            if vectors.len() != unique.len() {
                return Err(MetricError::BackendUnavailable(format!(
                    "embedder returned {} items for {} texts",
                    vectors.len(),
                    unique.len()
                )));
            }
            let lookup: HashMap<&str, &TokenVectors> = unique
                .iter()
                .map(String::as_str)
                .zip(vectors.iter())
                .collect();
            grid(pred, gold, |p, g| {
                greedy_match_f1(lookup[p], lookup[g], embed.rescale_baseline)
            })
        }
    };

    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let precision = sims
        .iter()
        .map(|row| clamp(row.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
        .sum::<f64>()
        / pred.len() as f64;
    let recall = (0..gold.len())
        .map(|j| {
            clamp(
                sims.iter()
                    .map(|row| row[j])
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .sum::<f64>()
        / gold.len() as f64;
    Ok(BaselineScore::new(metric, record_mode, precision, recall))
}

fn grid(pred: &[String], gold: &[String], sim: impl Fn(&str, &str) -> f64) -> Vec<Vec<f64>> {
    pred.iter()
        .map(|p| gold.iter().map(|g| sim(p, g)).collect())
        .collect()
}
