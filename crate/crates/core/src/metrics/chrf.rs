use std::collections::HashMap;

/// Highest character n-gram order.
pub const CHRF_MAX_ORDER: usize = 6;
/// Recall weight.
pub const CHRF_BETA: f64 = 2.0;

/// Character n-gram F-score with the default order and beta.
pub fn chrf(hypothesis: &str, reference: &str) -> f64 {
    chrf_with(hypothesis, reference, CHRF_MAX_ORDER, CHRF_BETA)
}

/// Character n-gram F-score.
///
/// Whitespace is removed before extracting n-grams. For each order 1..=max
/// precision and recall come from clipped n-gram counts; orders where either
/// side has no n-grams are skipped. The per-order precisions and recalls are
/// averaged and combined into F-beta. Two empty inputs score 1, one empty
/// input scores 0.
pub fn chrf_with(hypothesis: &str, reference: &str, max_order: usize, beta: f64) -> f64 {
    let hyp: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let refr: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    match (hyp.is_empty(), refr.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }

    let mut sum_p = 0.0;
    let mut sum_r = 0.0;
    let mut orders = 0usize;
    for n in 1..=max_order {
        if hyp.len() < n || refr.len() < n {
            continue;
        }
        let hyp_counts = ngram_counts(&hyp, n);
        let ref_counts = ngram_counts(&refr, n);
        let matches: usize = hyp_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        sum_p += matches as f64 / (hyp.len() - n + 1) as f64;
        sum_r += matches as f64 / (refr.len() - n + 1) as f64;
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    let p = sum_p / orders as f64;
    let r = sum_r / orders as f64;
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / denom
    }
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    for window in chars.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}
