//! Directional sentence-pair scoring and score matrices.
//!
//! A scorer maps (premise, hypothesis) pairs to values in `[0, 1]`. The
//! remote backend returns the entailment-class probability of an NLI model;
//! the lexical and exact backends are local stand-ins for offline use.

mod lexical;
mod remote;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::normalize_text;
use crate::unroll::StatementSet;

pub use lexical::{exact_score, lexical_score, ExactScorer, LexicalScorer};
pub use remote::{RemoteNliScorer, MAX_REMOTE_BATCH};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntailError {
    #[error("scoring backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("invalid scorer configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sentence pair: {0}")]
    InvalidPair(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScorePair {
    pub premise: String,
    pub hypothesis: String,
}

impl ScorePair {
    /// Both sides must be non-empty after whitespace normalization.
    pub fn new(premise: &str, hypothesis: &str) -> Result<Self, EntailError> {
        let premise = normalize_text(premise);
        let hypothesis = normalize_text(hypothesis);
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(EntailError::InvalidPair(
                "premise and hypothesis must be non-empty".into(),
            ));
        }
        Ok(Self {
            premise,
            hypothesis,
        })
    }
}

/// Which statement set plays the premise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// premise = gold statement, hypothesis = predicted statement
    GoldEntailsPred,
    /// premise = predicted statement, hypothesis = gold statement
    PredEntailsGold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    NliRemote,
    Lexical,
    Exact,
}

impl std::str::FromStr for Backend {
    type Err = EntailError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nli_remote" | "nli" | "remote" => Ok(Self::NliRemote),
            "lexical" => Ok(Self::Lexical),
            "exact" => Ok(Self::Exact),
            other => Err(EntailError::InvalidConfig(format!(
                "unknown scorer backend {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub backend: Backend,
    /// Base URL of the NLI service (remote backend only).
    #[serde(default)]
    pub endpoint_url: Option<String>,
    pub batch_size: usize,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub max_retries: usize,
    /// Upper bound on simultaneous in-flight requests per scorer.
    pub max_concurrency: usize,
    /// Sentences longer than this many characters are truncated.
    pub max_chars: usize,
}

impl ScorerConfig {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            endpoint_url: None,
            batch_size: 32,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            max_concurrency: 4,
            max_chars: 2000,
        }
    }

    pub fn remote(endpoint_url: &str) -> Self {
        Self {
            endpoint_url: Some(endpoint_url.to_string()),
            ..Self::new(Backend::NliRemote)
        }
    }

    pub fn validate(&self) -> Result<(), EntailError> {
        if self.batch_size == 0 {
            return Err(EntailError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.max_concurrency == 0 {
            return Err(EntailError::InvalidConfig(
                "max_concurrency must be >= 1".into(),
            ));
        }
        if self.backend == Backend::NliRemote && self.endpoint_url.is_none() {
            return Err(EntailError::InvalidConfig(
                "nli_remote needs an endpoint url".into(),
            ));
        }
        Ok(())
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// A directional pair scorer. Output has the input's length and order.
pub trait EntailmentScorer: Send + Sync {
    fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<f64>, EntailError>;

    /// True when `score(a, b) == score(b, a)` for all inputs.
    fn is_symmetric(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

/// Instantiates the backend named in `config`.
pub fn build_scorer(config: &ScorerConfig) -> Result<Box<dyn EntailmentScorer>, EntailError> {
    config.validate()?;
    Ok(match config.backend {
        Backend::Exact => Box::new(ExactScorer),
        Backend::Lexical => Box::new(LexicalScorer),
        Backend::NliRemote => Box::new(RemoteNliScorer::new(config)?),
    })
}

/// One-shot scoring with a freshly built backend.
pub fn score_batch(pairs: &[ScorePair], config: &ScorerConfig) -> Result<Vec<f64>, EntailError> {
    if pairs.is_empty() {
        return Err(EntailError::EmptyInput("no pairs to score".into()));
    }
    build_scorer(config)?.score_batch(pairs)
}

/// N predicted x M gold scores. Row `i` is predicted statement `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentMatrix {
    values: Vec<Vec<f64>>,
    pub direction: Direction,
}

impl EntailmentMatrix {
    /// Requires a non-empty rectangular grid of values in `[0, 1]`.
    pub fn new(values: Vec<Vec<f64>>, direction: Direction) -> Result<Self, EntailError> {
        let cols = values.first().map(Vec::len).unwrap_or(0);
        if values.is_empty() || cols == 0 {
            return Err(EntailError::EmptyInput(
                "matrix needs at least one row and column".into(),
            ));
        }
        if values.iter().any(|r| r.len() != cols) {
            return Err(EntailError::InvalidPair(
                "matrix rows differ in length".into(),
            ));
        }
        if let Some(v) = values.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(EntailError::InvalidPair(format!(
                "score {v} outside [0, 1]"
            )));
        }
        Ok(Self { values, direction })
    }

    pub fn n_pred(&self) -> usize {
        self.values.len()
    }

    pub fn n_gold(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, pred: usize, gold: usize) -> f64 {
        self.values[pred][gold]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Elementwise maximum of two matrices of equal shape.
    pub fn elementwise_max(&self, other: &Self) -> Result<Self, EntailError> {
        if self.n_pred() != other.n_pred() || self.n_gold() != other.n_gold() {
            return Err(EntailError::InvalidPair("matrix shapes differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.max(*y)).collect())
            .collect();
        Ok(Self {
            values,
            direction: self.direction,
        })
    }
}

/// Scores every (predicted, gold) pair oriented by `direction`. Pairs are
/// submitted row-major in a single batch call.
pub fn build_matrix(
    predicted: &StatementSet,
    gold: &StatementSet,
    direction: Direction,
    scorer: &dyn EntailmentScorer,
) -> Result<EntailmentMatrix, EntailError> {
    if predicted.is_empty() || gold.is_empty() {
        return Err(EntailError::EmptyInput(
            "both statement sets must be non-empty".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(predicted.len() * gold.len());
    for p in predicted.texts() {
        for g in gold.texts() {
            pairs.push(match direction {
                Direction::GoldEntailsPred => ScorePair::new(g, p)?,
                Direction::PredEntailsGold => ScorePair::new(p, g)?,
            });
        }
    }
    let scores = scorer.score_batch(&pairs)?;
    if scores.len() != pairs.len() {
        return Err(EntailError::BackendUnavailable(format!(
            "scorer returned {} scores for {} pairs",
            scores.len(),
            pairs.len()
        )));
    }
    let values = scores
        .chunks(gold.len())
        .map(|row| row.iter().map(|&v| clamp_score(v)).collect())
        .collect();
    EntailmentMatrix::new(values, direction)
}

/// Clamps into `[0, 1]`, logging any adjustment. NaN becomes 0.
pub(crate) fn clamp_score(v: f64) -> f64 {
    if v.is_nan() {
        log::warn!("scorer returned NaN; treating as 0");
        return 0.0;
    }
    if !(0.0..=1.0).contains(&v) {
        log::warn!("score {v} outside [0, 1]; clamped");
    }
    v.clamp(0.0, 1.0)
}
