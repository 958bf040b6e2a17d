use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::TableScore;
use super::baseline::{baseline_score, BaselineMetric, BaselineScore, EmbedConfig};
use super::embedding::TokenEmbedder;
use super::pipeline::{score_statement_sets, unroll_checked, DirectionPolicy, TabEvalOptions};
use super::MetricError;
use crate::entail::EntailmentScorer;
use crate::io::{DatasetRecord, PredictionRecord};
use crate::table::{RecordKind, Table};
use crate::unroll::{AttributionMode, StatementSet, Unroller};

/// Everything `evaluate_corpus` needs besides the data.
#[derive(Clone)]
pub struct CorpusConfig {
    pub unroller: Arc<dyn Unroller>,
    pub scorer: Arc<dyn EntailmentScorer>,
    pub options: TabEvalOptions,
    pub record_mode: RecordKind,
    pub baselines: Vec<BaselineMetric>,
    pub embedder: Option<Arc<dyn TokenEmbedder>>,
    pub rescale_baseline: Option<f64>,
    pub parallelism: usize,
}

impl CorpusConfig {
    pub fn new(unroller: Arc<dyn Unroller>, scorer: Arc<dyn EntailmentScorer>) -> Self {
        Self {
            unroller,
            scorer,
            options: TabEvalOptions::default(),
            record_mode: RecordKind::Triple,
            baselines: vec![BaselineMetric::Exact, BaselineMetric::Chrf],
            embedder: None,
            rescale_baseline: None,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    /// No prediction for this table; scored 0.
    Missing,
    /// Scoring failed; scored 0 and the error is recorded.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub model_id: String,
    pub table_id: String,
    pub status: EntryStatus,
    pub tabeval: TableScore,
    pub baselines: Vec<BaselineScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TableEntry {
    pub fn baseline(&self, metric: BaselineMetric) -> Option<&BaselineScore> {
        self.baselines.iter().find(|b| b.metric == metric)
    }
}

/// Unweighted means over tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroScores {
    pub n_tables: usize,
    pub tabeval: PrfScore,
    pub n_pred: f64,
    pub n_gold: f64,
    pub baselines: BTreeMap<BaselineMetric, PrfScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub n_ok: usize,
    pub n_missing: usize,
    pub n_failed: usize,
    #[serde(rename = "macro")]
    pub macro_scores: MacroScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub unroller: String,
    pub scorer: String,
    pub direction_policy: DirectionPolicy,
    pub attribution: AttributionMode,
    pub record_mode: RecordKind,
    pub baselines: Vec<BaselineMetric>,
}

/// Corpus evaluation result. Entries are ordered by (model id, table id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub settings: ReportSettings,
    pub models: Vec<ModelSummary>,
    pub overall: MacroScores,
    pub entries: Vec<TableEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MetricReport {
    pub fn entry(&self, model_id: &str, table_id: &str) -> Option<&TableEntry> {
        self.entries
            .iter()
            .find(|e| e.model_id == model_id && e.table_id == table_id)
    }

    pub fn model(&self, model_id: &str) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model_id == model_id)
    }

    pub fn has_failures(&self) -> bool {
        self.entries.iter().any(|e| e.status == EntryStatus::Failed)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, MetricError> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| MetricError::Config(e.to_string()))
    }
}

struct GoldTable {
    table: Result<Table, String>,
    statements: Result<StatementSet, String>,
}

/// Scores every prediction against its reference.
///
/// Each model found in `preds` is evaluated over the full reference set;
/// references it has no prediction for are scored 0 and marked missing.
/// Per-table failures are recorded in the report instead of aborting.
/// Output does not depend on `parallelism`.
pub fn evaluate_corpus(
    gold: &[DatasetRecord],
    preds: &[PredictionRecord],
    config: &CorpusConfig,
) -> Result<MetricReport, MetricError> {
    if config.parallelism == 0 {
        return Err(MetricError::Config("parallelism must be >= 1".into()));
    }
    if config.baselines.contains(&BaselineMetric::Embedding) && config.embedder.is_none() {
        return Err(MetricError::Config(
            "embedding baseline needs an embedder".into(),
        ));
    }
    let mut gold_by_id: BTreeMap<&str, &DatasetRecord> = BTreeMap::new();
    for rec in gold {
        if gold_by_id.insert(rec.id.as_str(), rec).is_some() {
            return Err(MetricError::Config(format!(
                "duplicate reference id {:?}",
                rec.id
            )));
        }
    }

    let mut warnings = Vec::new();
    let mut pred_index: HashMap<(&str, &str), &PredictionRecord> = HashMap::new();
    let mut models: BTreeSet<&str> = BTreeSet::new();
    for p in preds {
        if !gold_by_id.contains_key(p.id.as_str()) {
            warnings.push(format!(
                "prediction {:?} ({}) has no reference",
                p.id, p.model_id
            ));
            continue;
        }
        models.insert(p.model_id.as_str());
        if pred_index
            .insert((p.model_id.as_str(), p.id.as_str()), p)
            .is_some()
        {
            warnings.push(format!(
                "duplicate prediction {:?} for {}; last one wins",
                p.id, p.model_id
            ));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| MetricError::Config(e.to_string()))?;

    let gold_ids: Vec<&str> = gold_by_id.keys().copied().collect();
    let gold_tables: Vec<GoldTable> = pool.install(|| {
        gold_ids
            .par_iter()
            .map(|id| {
                let rec = gold_by_id[id];
                let table = Table::parse_auto(&rec.table, &rec.intent).map_err(|e| e.to_string());
                let statements = match &table {
                    Ok(t) => {
                        unroll_checked(t, config.unroller.as_ref(), config.options.attribution)
                            .map_err(|e| e.to_string())
                    }
                    Err(e) => Err(e.clone()),
                };
                GoldTable { table, statements }
            })
            .collect()
    });

    let jobs: Vec<(&str, usize)> = models
        .iter()
        .flat_map(|m| (0..gold_ids.len()).map(move |g| (*m, g)))
        .collect();
    let entries: Vec<TableEntry> = pool.install(|| {
        jobs.par_iter()
            .map(|&(model, g)| {
                let id = gold_ids[g];
                let pred = pred_index.get(&(model, id)).copied();
                score_entry(model, id, &gold_tables[g], pred, config)
            })
            .collect()
    });

    for e in &entries {
        if e.status == EntryStatus::Missing {
            warnings.push(format!(
                "no prediction from {} for {:?}; scored 0",
                e.model_id, e.table_id
            ));
        }
    }

    let summaries = models
        .iter()
        .map(|m| {
            let mine: Vec<&TableEntry> = entries.iter().filter(|e| e.model_id == *m).collect();
            ModelSummary {
                model_id: m.to_string(),
                n_ok: mine.iter().filter(|e| e.status == EntryStatus::Ok).count(),
                n_missing: mine
                    .iter()
                    .filter(|e| e.status == EntryStatus::Missing)
                    .count(),
                n_failed: mine
                    .iter()
                    .filter(|e| e.status == EntryStatus::Failed)
                    .count(),
                macro_scores: macro_average(&mine, &config.baselines),
            }
        })
        .collect();
    let all: Vec<&TableEntry> = entries.iter().collect();

    Ok(MetricReport {
        settings: ReportSettings {
            unroller: config.unroller.name(),
            scorer: config.scorer.name(),
            direction_policy: config.options.policy,
            attribution: config.options.attribution,
            record_mode: config.record_mode,
            baselines: config.baselines.clone(),
        },
        models: summaries,
        overall: macro_average(&all, &config.baselines),
        entries,
        warnings,
    })
}

fn zero_baselines(config: &CorpusConfig) -> Vec<BaselineScore> {
    config
        .baselines
        .iter()
        .map(|&m| BaselineScore::new(m, config.record_mode, 0.0, 0.0))
        .collect()
}

fn score_entry(
    model: &str,
    id: &str,
    gold: &GoldTable,
    pred: Option<&PredictionRecord>,
    config: &CorpusConfig,
) -> TableEntry {
    let mut entry = TableEntry {
        model_id: model.to_string(),
        table_id: id.to_string(),
        status: EntryStatus::Ok,
        tabeval: TableScore::zero(0, 0),
        baselines: zero_baselines(config),
        warnings: Vec::new(),
        error: None,
    };
    let (gold_table, gold_set) = match (&gold.table, &gold.statements) {
        (Ok(t), Ok(s)) => (t, s),
        (Err(e), _) | (_, Err(e)) => {
            entry.status = EntryStatus::Failed;
            entry.error = Some(format!("reference: {e}"));
            return entry;
        }
    };
    entry.tabeval = TableScore::zero(0, gold_set.len());
    let Some(pred) = pred else {
        entry.status = EntryStatus::Missing;
        return entry;
    };

    // the prediction inherits the reference intent, caption fallback included
    let pred_table = match Table::parse_auto(&pred.table, &gold_table.intent) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("{model}/{id}: prediction does not parse: {e}");
            entry
                .warnings
                .push(format!("prediction does not parse: {e}"));
            return entry;
        }
    };

    let scored = (|| -> Result<(TableScore, Vec<BaselineScore>), MetricError> {
        let pred_set = unroll_checked(
            &pred_table,
            config.unroller.as_ref(),
            config.options.attribution,
        )?;
        let tabeval = score_statement_sets(
            &pred_set,
            gold_set,
            config.scorer.as_ref(),
            config.options.policy,
        )?;
        let embed = config.embedder.as_deref().map(|embedder| EmbedConfig {
            embedder,
            rescale_baseline: config.rescale_baseline,
        });
        let baselines = config
            .baselines
            .iter()
            .map(|&m| baseline_score(gold_table, &pred_table, m, config.record_mode, embed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((tabeval, baselines))
    })();

    match scored {
        Ok((tabeval, baselines)) => {
            entry.tabeval = tabeval;
            entry.baselines = baselines;
        }
        Err(e) => {
            log::warn!("{model}/{id}: {e}");
            entry.status = EntryStatus::Failed;
            entry.error = Some(e.to_string());
        }
    }
    entry
}

fn macro_average(entries: &[&TableEntry], metrics: &[BaselineMetric]) -> MacroScores {
    let n = entries.len();
    if n == 0 {
        return MacroScores::default();
    }
    let mean =
        |f: &dyn Fn(&TableEntry) -> f64| entries.iter().map(|e| f(e)).sum::<f64>() / n as f64;
    let mut baselines = BTreeMap::new();
    for &m in metrics {
        let get = |e: &TableEntry| e.baseline(m).copied();
        baselines.insert(
            m,
            PrfScore {
                precision: mean(&|e| get(e).map_or(0.0, |b| b.precision)),
                recall: mean(&|e| get(e).map_or(0.0, |b| b.recall)),
                f1: mean(&|e| get(e).map_or(0.0, |b| b.f1)),
            },
        );
    }
    MacroScores {
        n_tables: n,
        tabeval: PrfScore {
            precision: mean(&|e| e.tabeval.precision),
            recall: mean(&|e| e.tabeval.recall),
            f1: mean(&|e| e.tabeval.f1),
        },
        n_pred: mean(&|e| e.tabeval.n_pred as f64),
        n_gold: mean(&|e| e.tabeval.n_gold as f64),
        baselines,
    }
}
