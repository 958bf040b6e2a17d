use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_precision, aggregate_recall, TableScore};
use super::MetricError;
use crate::entail::{build_matrix, Direction, EntailmentScorer};
use crate::table::Table;
use crate::unroll::{validate_attribution, AttributionMode, StatementSet, UnrollError, Unroller};

/// How premise/hypothesis roles are assigned for precision and recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionPolicy {
    /// Precision: gold entails predicted. Recall: predicted entails gold.
    #[default]
    PerMetric,
    /// One direction for both.
    Fixed(Direction),
    /// Elementwise maximum over both directions.
    MaxOfBoth,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TabEvalOptions {
    pub policy: DirectionPolicy,
    pub attribution: AttributionMode,
}

/// Unrolls and, in strict mode, drops unattributable statements. A table
/// with no data rows unrolls to the empty set.
pub fn unroll_checked(
    table: &Table,
    unroller: &dyn Unroller,
    attribution: AttributionMode,
) -> Result<StatementSet, UnrollError> {
    let set = match unroller.unroll(table) {
        Ok(set) => set,
        Err(UnrollError::EmptyTable) => return Ok(StatementSet::deterministic(Vec::new())),
        Err(e) => return Err(e),
    };
    let report = validate_attribution(&set, table, attribution);
    if !report.is_clean() {
        log::warn!(
            "{} unsupported statement(s) for table {:?}",
            report.flags.len(),
            table.intent
        );
    }
    Ok(report.statements)
}

/// Unrolls both tables and scores them.
pub fn tabeval_score(
    gold: &Table,
    pred: &Table,
    unroller: &dyn Unroller,
    scorer: &dyn EntailmentScorer,
    options: TabEvalOptions,
) -> Result<TableScore, MetricError> {
    let gold_set = unroll_checked(gold, unroller, options.attribution)?;
    let pred_set = unroll_checked(pred, unroller, options.attribution)?;
    score_statement_sets(&pred_set, &gold_set, scorer, options.policy)
}

/// Precision, recall and F1 over two statement sets. Both empty scores 1,
/// exactly one empty scores 0.
pub fn score_statement_sets(
    predicted: &StatementSet,
    gold: &StatementSet,
    scorer: &dyn EntailmentScorer,
    policy: DirectionPolicy,
) -> Result<TableScore, MetricError> {
    let (n_pred, n_gold) = (predicted.len(), gold.len());
    match (n_pred, n_gold) {
        (0, 0) => return Ok(TableScore::perfect(0, 0)),
        (0, _) | (_, 0) => return Ok(TableScore::zero(n_pred, n_gold)),
        _ => {}
    }
    let (p_matrix, r_matrix) = match policy {
        DirectionPolicy::PerMetric if scorer.is_symmetric() => {
            let m = build_matrix(predicted, gold, Direction::GoldEntailsPred, scorer)?;
            (m.clone(), m)
        }
        DirectionPolicy::PerMetric => (
            build_matrix(predicted, gold, Direction::GoldEntailsPred, scorer)?,
            build_matrix(predicted, gold, Direction::PredEntailsGold, scorer)?,
        ),
        DirectionPolicy::Fixed(d) => {
            let m = build_matrix(predicted, gold, d, scorer)?;
            (m.clone(), m)
        }
        DirectionPolicy::MaxOfBoth => {
            let a = build_matrix(predicted, gold, Direction::GoldEntailsPred, scorer)?;
            let m = if scorer.is_symmetric() {
                a
            } else {
                a.elementwise_max(&build_matrix(
                    predicted,
                    gold,
                    Direction::PredEntailsGold,
                    scorer,
                )?)?
            };
            (m.clone(), m)
        }
    };
    Ok(TableScore::new(
        aggregate_precision(&p_matrix),
        aggregate_recall(&r_matrix),
        n_pred,
        n_gold,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entail::{EntailError, ExactScorer, ScorePair};
    use crate::unroll::{DeterministicUnroller, Statement};

    fn set(texts: &[&str]) -> StatementSet {
        StatementSet::deterministic(
            texts
                .iter()
                .map(|t| Statement::new(*t, vec![]).unwrap())
                .collect(),
        )
    }

    /// Scores 1 only when the hypothesis is a prefix of the premise.
    struct Prefix;
    impl EntailmentScorer for Prefix {
        fn score_batch(&self, pairs: &[ScorePair]) -> Result<Vec<f64>, EntailError> {
            Ok(pairs
                .iter()
                .map(|p| {
                    if p.premise.starts_with(&p.hypothesis) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        fn name(&self) -> String {
            "prefix".into()
        }
    }

    #[test]
    fn empty_edges() {
        let e = set(&[]);
        let s = set(&["a"]);
        assert_eq!(
            score_statement_sets(&e, &e, &ExactScorer, DirectionPolicy::PerMetric)
                .unwrap()
                .f1,
            1.0
        );
        let z = score_statement_sets(&e, &s, &ExactScorer, DirectionPolicy::PerMetric).unwrap();
        assert_eq!(
            (z.precision, z.recall, z.f1, z.n_pred, z.n_gold),
            (0.0, 0.0, 0.0, 0, 1)
        );
    }

    #[test]
    fn policies_differ_for_directional_scorers() {
        // gold "ab" has pred "a" as prefix: gold entails pred, not vice versa
        let pred = set(&["a"]);
        let gold = set(&["ab"]);
        let per = score_statement_sets(&pred, &gold, &Prefix, DirectionPolicy::PerMetric).unwrap();
        assert_eq!((per.precision, per.recall), (1.0, 0.0));
        let fixed = score_statement_sets(
            &pred,
            &gold,
            &Prefix,
            DirectionPolicy::Fixed(Direction::PredEntailsGold),
        )
        .unwrap();
        assert_eq!((fixed.precision, fixed.recall), (0.0, 0.0));
        let max = score_statement_sets(&pred, &gold, &Prefix, DirectionPolicy::MaxOfBoth).unwrap();
        assert_eq!((max.precision, max.recall), (1.0, 1.0));
    }

    #[test]
    fn identical_tables_are_perfect() {
        let t =
            Table::from_strings("t", ["k", "v", "w"], [["a", "1", "x"], ["b", "2", "y"]]).unwrap();
        let s = tabeval_score(
            &t,
            &t,
            &DeterministicUnroller::default(),
            &ExactScorer,
            TabEvalOptions::default(),
        )
        .unwrap();
        assert_eq!(
            (s.precision, s.recall, s.f1, s.n_pred, s.n_gold),
            (1.0, 1.0, 1.0, 4, 4)
        );
    }

    #[test]
    fn zero_row_prediction_scores_zero() {
        let gold = Table::from_strings("t", ["k", "v"], [["a", "1"]]).unwrap();
        let pred = Table::from_strings("t", ["k", "v"], Vec::<Vec<&str>>::new()).unwrap();
        let s = tabeval_score(
            &gold,
            &pred,
            &DeterministicUnroller::default(),
            &ExactScorer,
            TabEvalOptions::default(),
        )
        .unwrap();
        assert_eq!((s.f1, s.n_pred), (0.0, 0));
    }
}
