use std::collections::HashMap;

use super::{EntailError, EntailmentScorer, ScorePair};
use crate::table::normalize_text;

/// 1.0 iff the whitespace-normalized strings are equal.
pub fn exact_score(premise: &str, hypothesis: &str) -> f64 {
    if normalize_text(premise) == normalize_text(hypothesis) {
        1.0
    } else {
        0.0
    }
}

fn tokens(s: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for raw in s.split_whitespace() {
        let tok: String = raw
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        if !tok.is_empty() {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    counts
}

/// Token-multiset F1 between premise and hypothesis (lowercased,
/// punctuation stripped). Precision is taken over hypothesis tokens.
pub fn lexical_score(premise: &str, hypothesis: &str) -> f64 {
    let p = tokens(premise);
    let h = tokens(hypothesis);
    let p_total: usize = p.values().sum();
    let h_total: usize = h.values().sum();
    if p_total == 0 && h_total == 0 {
        return 1.0;
    }
    if p_total == 0 || h_total == 0 {
        return 0.0;
    }
    let overlap: usize = h
        .iter()
        .map(|(tok, &n)| n.min(p.get(tok).copied().unwrap_or(0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / h_total as f64;
    let recall = overlap as f64 / p_total as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactScorer;

impl EntailmentScorer for ExactScorer {
    fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<f64>, EntailError> {
        Ok(pairs
            .iter()
            .map(|p| exact_score(&p.premise, &p.hypothesis))
            .collect())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "exact".into()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl EntailmentScorer for LexicalScorer {
    fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<f64>, EntailError> {
        Ok(pairs
            .iter()
            .map(|p| lexical_score(&p.premise, &p.hypothesis))
            .collect())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "lexical".into()
    }
}
