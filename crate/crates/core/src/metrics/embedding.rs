use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::http::JsonClient;

/// Per-token vectors for each input text, in input order.
pub type TokenVectors = Vec<Vec<f64>>;

/// Supplies contextual token embeddings for the similarity baseline.
pub trait TokenEmbedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<TokenVectors>, String>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<EmbeddedText>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EmbeddedText {
    Tagged {
        #[serde(default)]
        tokens: Option<usize>,
        vectors: TokenVectors,
    },
    Bare(TokenVectors),
}

/// Client for `POST /v1/embed`.
pub struct RemoteEmbedder {
    client: JsonClient,
    batch_size: usize,
}

impl RemoteEmbedder {
    pub fn new(base_url: &str, timeout: Duration, batch_size: usize) -> Self {
        Self {
            client: JsonClient::new(base_url, timeout, 2, 4),
            batch_size: batch_size.clamp(1, 256),
        }
    }
}

impl TokenEmbedder for RemoteEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<TokenVectors>, String> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            let resp: EmbedResponse = self
                .client
                .post("/v1/embed", &EmbedRequest { texts: chunk })?;
            if resp.embeddings.len() != chunk.len() {
                return Err(format!(
                    "embed service returned {} items for {} texts",
                    resp.embeddings.len(),
                    chunk.len()
                ));
            }
            for item in resp.embeddings {
                let vectors = match item {
                    EmbeddedText::Tagged { tokens, vectors } => {
                        if let Some(n) = tokens {
                            if n != vectors.len() {
                                log::warn!(
                                    "token count {n} disagrees with {} vectors",
                                    vectors.len()
                                );
                            }
                        }
                        vectors
                    }
                    EmbeddedText::Bare(v) => v,
                };
                out.push(vectors);
            }
        }
        Ok(out)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Greedy token matching: each candidate token takes its most similar
/// reference token (precision) and vice versa (recall); returns their F1.
/// `baseline`, when set, applies `(x - b) / (1 - b)`.
pub fn greedy_match_f1(
    candidate: &TokenVectors,
    reference: &TokenVectors,
    baseline: Option<f64>,
) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return if candidate.is_empty() && reference.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    let sims: Vec<Vec<f64>> = candidate
        .iter()
        .map(|c| reference.iter().map(|r| cosine(c, r)).collect())
        .collect();
    let precision = sims
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / candidate.len() as f64;
    let recall = (0..reference.len())
        .map(|j| {
            sims.iter()
                .map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / reference.len() as f64;
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    match baseline {
        Some(b) if b < 1.0 => (f - b) / (1.0 - b),
        _ => f,
    }
}
