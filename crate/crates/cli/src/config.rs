//! Run configuration: JSON file defaults overlaid with command-line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tabeval::entail::{build_scorer, Backend, EntailmentScorer, ScorerConfig};
use tabeval::metrics::{
    BaselineMetric, CorpusConfig, DirectionPolicy, RemoteEmbedder, TabEvalOptions,
};
use tabeval::table::RecordKind;
use tabeval::unroll::{
    AttributionMode, DeterministicUnroller, HttpCompletionClient, LlmSettings, LlmUnroller,
    UnrollCache, Unroller, API_KEY_ENV,
};

use crate::CliError;

pub const DEFAULT_LLM_URL: &str = "https://api.openai.com/v1/chat/completions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UnrollerKind {
    #[default]
    Deterministic,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Exact,
    Lexical,
    NliRemote,
}

impl From<ScorerKind> for Backend {
    fn from(k: ScorerKind) -> Self {
        match k {
            ScorerKind::Exact => Backend::Exact,
            ScorerKind::Lexical => Backend::Lexical,
            ScorerKind::NliRemote => Backend::NliRemote,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordModeArg {
    Pair,
    Triple,
}

impl From<RecordModeArg> for RecordKind {
    fn from(k: RecordModeArg) -> Self {
        match k {
            RecordModeArg::Pair => RecordKind::Pair,
            RecordModeArg::Triple => RecordKind::Triple,
        }
    }
}

/// Everything a run needs besides its input files. Missing keys in a
/// config file take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub unroller: UnrollerKind,
    pub scorer: Backend,
    pub scorer_url: Option<String>,
    pub scorer_batch_size: usize,
    pub timeout_secs: u64,
    pub record_mode: RecordKind,
    pub baselines: Vec<BaselineMetric>,
    pub direction_policy: DirectionPolicy,
    pub cache_dir: Option<PathBuf>,
    pub parallelism: usize,
    pub strict_attribution: bool,
    pub llm_url: Option<String>,
    pub llm_model: Option<String>,
    pub llm_max_retries: usize,
    pub embed_url: Option<String>,
    pub rescale_baseline: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            unroller: UnrollerKind::Deterministic,
            scorer: Backend::Exact,
            scorer_url: None,
            scorer_batch_size: 32,
            timeout_secs: 60,
            record_mode: RecordKind::Triple,
            baselines: vec![BaselineMetric::Exact, BaselineMetric::Chrf],
            direction_policy: DirectionPolicy::PerMetric,
            cache_dir: None,
            parallelism: 1,
            strict_attribution: false,
            llm_url: None,
            llm_model: None,
            llm_max_retries: 2,
            embed_url: None,
            rescale_baseline: None,
        }
    }
}

/// Flags shared by every subcommand that unrolls or scores.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub unroller: Option<UnrollerKind>,
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Base URL of the NLI service.
    #[arg(long)]
    pub scorer_url: Option<String>,
    #[arg(long, value_enum)]
    pub record_mode: Option<RecordModeArg>,
    /// Comma-separated baseline metrics (exact, chrf, embedding).
    #[arg(long, value_delimiter = ',')]
    pub baselines: Option<Vec<String>>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Directory for cached LLM unroll responses.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Drop statements that fail the attribution check.
    #[arg(long)]
    pub strict_attribution: bool,
    /// Chat-completions endpoint for the LLM unroller.
    #[arg(long)]
    pub llm_url: Option<String>,
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Base URL of the token-embedding service; enables the embedding baseline.
    #[arg(long)]
    pub embed_url: Option<String>,
}

impl RunFlags {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(u) = self.unroller {
            cfg.unroller = u;
        }
        if let Some(s) = self.scorer {
            cfg.scorer = s.into();
        }
        if let Some(u) = &self.scorer_url {
            cfg.scorer_url = Some(u.clone());
        }
        if let Some(m) = self.record_mode {
            cfg.record_mode = m.into();
        }
        if let Some(list) = &self.baselines {
            cfg.baselines = list
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<BaselineMetric>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        if let Some(d) = &self.cache_dir {
            cfg.cache_dir = Some(d.clone());
        }
        if self.strict_attribution {
            cfg.strict_attribution = true;
        }
        if let Some(u) = &self.llm_url {
            cfg.llm_url = Some(u.clone());
        }
        if let Some(m) = &self.llm_model {
            cfg.llm_model = Some(m.clone());
        }
        if let Some(u) = &self.embed_url {
            cfg.embed_url = Some(u.clone());
        }
        if cfg.embed_url.is_some() && !cfg.baselines.contains(&BaselineMetric::Embedding) {
            cfg.baselines.push(BaselineMetric::Embedding);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = tabeval::io::read_text(path).map_err(|e| CliError::Config(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.parallelism == 0 {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        if self.unroller == UnrollerKind::Llm {
            if self.llm_model.as_deref().unwrap_or("").is_empty() {
                return Err(CliError::Config(
                    "the llm unroller needs --llm-model".into(),
                ));
            }
            if std::env::var(API_KEY_ENV).map_or(true, |v| v.is_empty()) {
                return Err(CliError::Config(format!(
                    "the llm unroller needs {API_KEY_ENV} to be set"
                )));
            }
        }
        if self.baselines.contains(&BaselineMetric::Embedding) && self.embed_url.is_none() {
            return Err(CliError::Config(
                "the embedding baseline needs --embed-url".into(),
            ));
        }
        self.scorer_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn attribution(&self) -> AttributionMode {
        if self.strict_attribution {
            AttributionMode::Strict
        } else {
            AttributionMode::Report
        }
    }

    pub fn scorer_config(&self) -> ScorerConfig {
        ScorerConfig {
            endpoint_url: self.scorer_url.clone(),
            batch_size: self.scorer_batch_size,
            timeout: self.timeout(),
            max_concurrency: self.parallelism.max(1),
            ..ScorerConfig::new(self.scorer)
        }
    }

    pub fn build_unroller(&self) -> Result<Arc<dyn Unroller>, CliError> {
        match self.unroller {
            UnrollerKind::Deterministic => Ok(Arc::new(DeterministicUnroller::default())),
            UnrollerKind::Llm => {
                let model = self.llm_model.as_deref().unwrap_or_default();
                let url = self.llm_url.as_deref().unwrap_or(DEFAULT_LLM_URL);
                let client = HttpCompletionClient::from_env(url, model, self.timeout())
                    .map_err(CliError::Config)?;
                let cache = match &self.cache_dir {
                    Some(dir) => Some(Arc::new(
                        UnrollCache::open(dir).map_err(|e| CliError::Config(e.to_string()))?,
                    )),
                    None => None,
                };
                let settings = LlmSettings {
                    max_retries: self.llm_max_retries,
                    ..LlmSettings::default()
                };
                Ok(Arc::new(LlmUnroller::new(
                    Arc::new(client),
                    cache,
                    settings,
                )))
            }
        }
    }

    pub fn build_scorer(&self) -> Result<Arc<dyn EntailmentScorer>, CliError> {
        build_scorer(&self.scorer_config())
            .map(Arc::from)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn corpus_config(&self) -> Result<CorpusConfig, CliError> {
        let mut c = CorpusConfig::new(self.build_unroller()?, self.build_scorer()?);
        c.options = TabEvalOptions {
            policy: self.direction_policy,
            attribution: self.attribution(),
        };
        c.record_mode = self.record_mode;
        c.baselines = self.baselines.clone();
        c.parallelism = self.parallelism;
        c.rescale_baseline = self.rescale_baseline;
        if let Some(url) = &self.embed_url {
            c.embedder = Some(Arc::new(RemoteEmbedder::new(url, self.timeout(), 32)));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"parallelism": 3, "scorer": "lexical", "record_mode": "pair"}"#,
        )
        .unwrap();
        let flags = RunFlags {
            config: Some(path.clone()),
            parallelism: Some(5),
            ..RunFlags::default()
        };
        let cfg = flags.resolve().unwrap();
        assert_eq!(cfg.parallelism, 5);
        assert_eq!(cfg.scorer, Backend::Lexical);
        assert_eq!(cfg.record_mode, RecordKind::Pair);

        let cfg = RunFlags {
            config: Some(path),
            ..RunFlags::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg.parallelism, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"paralelism": 3}"#).unwrap();
        assert!(load_config(&path).is_err());
    }

    #[test]
    fn llm_needs_model() {
        let flags = RunFlags {
            unroller: Some(UnrollerKind::Llm),
            ..RunFlags::default()
        };
        let err = flags.resolve().unwrap_err();
        assert!(err.to_string().contains("--llm-model"));
    }

    #[test]
    fn remote_scorer_needs_url() {
        let flags = RunFlags {
            scorer: Some(ScorerKind::NliRemote),
            ..RunFlags::default()
        };
        assert!(flags.resolve().is_err());
    }

    #[test]
    fn embed_url_enables_embedding_baseline() {
        let flags = RunFlags {
            embed_url: Some("http://localhost:1".into()),
            ..RunFlags::default()
        };
        assert!(flags
            .resolve()
            .unwrap()
            .baselines
            .contains(&BaselineMetric::Embedding));
    }
}
