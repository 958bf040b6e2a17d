//! Python bindings: tables, unrolling, scoring and analysis helpers.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use tabeval::analysis::{self, MeasurementLevel};
use tabeval::entail::{build_scorer, Backend, EntailmentScorer, ScorerConfig};
use tabeval::io::{parse_jsonl, DatasetRecord, PredictionRecord};
use tabeval::metrics::{self, BaselineMetric, CorpusConfig, DirectionPolicy};
use tabeval::table::{self, RecordKind};
use tabeval::unroll::{DeterministicUnroller, Statement, StatementSet, Unroller};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Table", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTable {
    inner: table::Table,
}

#[pymethods]
impl PyTable {
    /// Parses HTML or markdown.
    #[staticmethod]
    #[pyo3(signature = (text, intent = ""))]
    fn parse(text: &str, intent: &str) -> PyResult<Self> {
        table::Table::parse_auto(text, intent)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_rows(intent: &str, headers: Vec<String>, rows: Vec<Vec<String>>) -> PyResult<Self> {
        table::Table::from_strings(intent, headers, rows)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn intent(&self) -> String {
        self.inner.intent.clone()
    }

    #[getter]
    fn headers(&self) -> Vec<String> {
        self.inner.column_headers().to_vec()
    }

    /// Cell texts; empty cells are `""`.
    #[getter]
    fn rows(&self) -> Vec<Vec<String>> {
        self.inner
            .rows()
            .iter()
            .map(|r| r.iter().map(|c| c.text.clone()).collect())
            .collect()
    }

    fn to_markdown(&self) -> String {
        table::render_markdown(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Table(intent={:?}, rows={}, cols={})",
            self.inner.intent,
            self.inner.n_rows(),
            self.inner.n_cols()
        )
    }
}

#[pyclass(name = "Score", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyScore {
    precision: f64,
    recall: f64,
    f1: f64,
}

#[pymethods]
impl PyScore {
    fn __repr__(&self) -> String {
        format!(
            "Score(precision={}, recall={}, f1={})",
            self.precision, self.recall, self.f1
        )
    }
}

fn scorer(name: &str, url: Option<String>) -> PyResult<Box<dyn EntailmentScorer>> {
    let backend: Backend = name.parse().map_err(err)?;
    build_scorer(&ScorerConfig {
        endpoint_url: url,
        ..ScorerConfig::new(backend)
    })
    .map_err(err)
}

fn record_kind(name: &str) -> PyResult<RecordKind> {
    match name {
        "pair" => Ok(RecordKind::Pair),
        "triple" => Ok(RecordKind::Triple),
        other => Err(err(format!("unknown record mode {other:?}"))),
    }
}

/// Deterministic unrolling: list of `(text, supporting_rows)`.
#[pyfunction]
fn unroll(table: &PyTable) -> PyResult<Vec<(String, Vec<usize>)>> {
    let set = DeterministicUnroller::default()
        .unroll(&table.inner)
        .map_err(err)?;
    Ok(set
        .statements
        .into_iter()
        .map(|s| (s.text().to_string(), s.supporting_rows))
        .collect())
}

/// Scores two statement lists with the named backend.
#[pyfunction]
#[pyo3(signature = (predicted, gold, scorer_name = "exact", scorer_url = None))]
fn score_statements(
    predicted: Vec<String>,
    gold: Vec<String>,
    scorer_name: &str,
    scorer_url: Option<String>,
) -> PyResult<PyScore> {
    let to_set = |v: Vec<String>| -> PyResult<StatementSet> {
        Ok(StatementSet::deterministic(
            v.into_iter()
                .map(|t| Statement::new(t, vec![]))
                .collect::<Result<_, _>>()
                .map_err(err)?,
        ))
    };
    let s = metrics::score_statement_sets(
        &to_set(predicted)?,
        &to_set(gold)?,
        scorer(scorer_name, scorer_url)?.as_ref(),
        DirectionPolicy::PerMetric,
    )
    .map_err(err)?;
    Ok(PyScore {
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
    })
}

/// Unrolls both tables deterministically and scores them.
#[pyfunction]
#[pyo3(signature = (gold, predicted, scorer_name = "exact", scorer_url = None))]
fn tabeval_score(
    gold: &PyTable,
    predicted: &PyTable,
    scorer_name: &str,
    scorer_url: Option<String>,
) -> PyResult<PyScore> {
    let s = metrics::tabeval_score(
        &gold.inner,
        &predicted.inner,
        &DeterministicUnroller::default(),
        scorer(scorer_name, scorer_url)?.as_ref(),
        Default::default(),
    )
    .map_err(err)?;
    Ok(PyScore {
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
    })
}

#[pyfunction]
#[pyo3(signature = (gold, predicted, metric = "exact", record_mode = "triple"))]
fn baseline_score(
    gold: &PyTable,
    predicted: &PyTable,
    metric: &str,
    record_mode: &str,
) -> PyResult<PyScore> {
    let metric: BaselineMetric = metric.parse().map_err(err)?;
    let s = metrics::baseline_score(
        &gold.inner,
        &predicted.inner,
        metric,
        record_kind(record_mode)?,
        None,
    )
    .map_err(err)?;
    Ok(PyScore {
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
    })
}

#[pyfunction]
fn chrf(hypothesis: &str, reference: &str) -> f64 {
    metrics::chrf(hypothesis, reference)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    analysis::pearson(&x, &y).map_err(err)
}

/// `ratings[rater][item]`, `None` for missing.
#[pyfunction]
#[pyo3(signature = (ratings, level = "ordinal"))]
fn krippendorff_alpha(ratings: Vec<Vec<Option<f64>>>, level: &str) -> PyResult<f64> {
    let level = match level {
        "nominal" => MeasurementLevel::Nominal,
        "ordinal" => MeasurementLevel::Ordinal,
        "interval" => MeasurementLevel::Interval,
        other => return Err(err(format!("unknown measurement level {other:?}"))),
    };
    analysis::krippendorff_alpha(&ratings, level).map_err(err)
}

/// Corpus evaluation over JSONL strings with the deterministic unroller.
/// Returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (refs_jsonl, preds_jsonl, scorer_name = "exact", scorer_url = None, parallelism = 1))]
fn evaluate_corpus(
    py: Python<'_>,
    refs_jsonl: &str,
    preds_jsonl: &str,
    scorer_name: &str,
    scorer_url: Option<String>,
    parallelism: usize,
) -> PyResult<String> {
    let refs: Vec<DatasetRecord> = parse_jsonl(refs_jsonl).map_err(err)?;
    let preds: Vec<PredictionRecord> = parse_jsonl(preds_jsonl).map_err(err)?;
    let mut config = CorpusConfig::new(
        Arc::new(DeterministicUnroller::default()),
        Arc::from(scorer(scorer_name, scorer_url)?),
    );
    config.parallelism = parallelism;
    let report = py
        .detach(|| metrics::evaluate_corpus(&refs, &preds, &config))
        .map_err(err)?;
    report.to_json().map_err(err)
}

#[pymodule(name = "tabeval")]
fn tabeval_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTable>()?;
    m.add_class::<PyScore>()?;
    m.add_function(wrap_pyfunction!(unroll, m)?)?;
    m.add_function(wrap_pyfunction!(score_statements, m)?)?;
    m.add_function(wrap_pyfunction!(tabeval_score, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_score, m)?)?;
    m.add_function(wrap_pyfunction!(chrf, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(krippendorff_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_corpus, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn koch() -> PyTable {
        PyTable::from_rows(
            "Koch",
            vec!["Year".into(), "Venue".into()],
            vec![
                vec!["1966".into(), "Dortmund".into()],
                vec!["1967".into(), "Prague".into()],
            ],
        )
        .unwrap()
    }

    #[test]
    fn unroll_and_score_without_interpreter() {
        let t = koch();
        let st = unroll(&t).unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st[1].1, vec![1]);
        let s = tabeval_score(&t, &t, "exact", None).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let b = baseline_score(&t, &t, "chrf", "pair").unwrap();
        assert_eq!(b.f1, 1.0);
        assert!(baseline_score(&t, &t, "chrf", "quad").is_err());
        assert!(score_statements(vec!["a".into()], vec!["a".into()], "nope", None).is_err());
    }

    #[test]
    fn module_functions_through_the_interpreter() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "tabeval").unwrap();
            tabeval_module(&m).unwrap();
            let r: f64 = m
                .getattr("pearson")
                .unwrap()
                .call1((vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0]))
                .unwrap()
                .extract()
                .unwrap();
            assert!((r - 0.981981).abs() < 1e-5);
            let refs =
                r#"{"id":"1","intent":"Koch","table":"|Year|Venue|\n|-|-|\n|1966|Dortmund|"}"#;
            let preds = r#"{"id":"1","table":"|Year|Venue|\n|-|-|\n|1966|Dortmund|"}"#;
            let json: String = evaluate_corpus(py, refs, preds, "exact", None, 2).unwrap();
            assert!(json.contains("\"f1\": 1.0"));
        });
    }
}
