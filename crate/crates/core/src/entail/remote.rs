use serde::{Deserialize, Serialize};

use super::{clamp_score, EntailError, EntailmentScorer, ScorePair, ScorerConfig};
use crate::http::JsonClient;

/// Largest batch the NLI service accepts per request.
pub const MAX_REMOTE_BATCH: usize = 256;

#[derive(Serialize)]
struct EntailRequest<'a> {
    pairs: Vec<PairBody<'a>>,
}

#[derive(Serialize)]
struct PairBody<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Deserialize)]
struct EntailResponse {
    scores: Vec<ClassProbs>,
}

#[derive(Deserialize)]
struct ClassProbs {
    entailment: f64,
    #[allow(dead_code)]
    #[serde(default)]
    neutral: f64,
    #[allow(dead_code)]
    #[serde(default)]
    contradiction: f64,
}

/// Client for `POST /v1/entail`. The score of a pair is the probability of
/// the entailment class.
pub struct RemoteNliScorer {
    client: JsonClient,
    batch_size: usize,
    max_chars: usize,
}

impl RemoteNliScorer {
    pub fn new(config: &ScorerConfig) -> Result<Self, EntailError> {
        config.validate()?;
        let url = config
            .endpoint_url
            .as_deref()
            .ok_or_else(|| EntailError::InvalidConfig("missing endpoint url".into()))?;
        Ok(Self {
            client: JsonClient::new(
                url,
                config.timeout,
                config.max_retries,
                config.max_concurrency,
            ),
            batch_size: config.batch_size.min(MAX_REMOTE_BATCH),
            max_chars: config.max_chars,
        })
    }

    fn truncate<'a>(&self, s: &'a str) -> &'a str {
        match s.char_indices().nth(self.max_chars) {
            Some((cut, _)) => {
                log::warn!(
                    "truncating {}-char sentence to {}",
                    s.chars().count(),
                    self.max_chars
                );
                &s[..cut]
            }
            None => s,
        }
    }
}

impl EntailmentScorer for RemoteNliScorer {
    fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<f64>, EntailError> {
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(self.batch_size) {
            let body = EntailRequest {
                pairs: chunk
                    .iter()
                    .map(|p| PairBody {
                        premise: self.truncate(&p.premise),
                        hypothesis: self.truncate(&p.hypothesis),
                    })
                    .collect(),
            };
            let resp: EntailResponse = self
                .client
                .post("/v1/entail", &body)
                .map_err(EntailError::BackendUnavailable)?;
            if resp.scores.len() != chunk.len() {
                return Err(EntailError::BackendUnavailable(format!(
                    "service returned {} scores for {} pairs",
                    resp.scores.len(),
                    chunk.len()
                )));
            }
            out.extend(resp.scores.iter().map(|s| clamp_score(s.entailment)));
        }
        Ok(out)
    }

    fn name(&self) -> String {
        "nli_remote".into()
    }
}
