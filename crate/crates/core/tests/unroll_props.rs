mod common;

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use tabeval::table::Table;
use tabeval::unroll::{
    detect_anchor, parse_unroll_response, unroll_deterministic, validate_attribution,
    AttributionMode, DeterministicUnroller, Unroller,
};

use common::strategies;

fn unique_under(t: &Table, cols: &[usize]) -> bool {
    let mut seen = HashSet::new();
    (0..t.n_rows()).all(|r| {
        seen.insert(
            cols.iter()
                .map(|&c| t.cell(r, c).text.clone())
                .collect::<Vec<_>>(),
        )
    })
}

/// Every subset of `0..n` with exactly `k` members, in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    out.sort();
    out
}

fn expected_count(t: &Table) -> usize {
    let anchor = detect_anchor(t, 3);
    let multi = anchor.column_indices.len() > 1;
    (0..t.n_rows())
        .map(|r| {
            let facts = (0..t.n_cols())
                .filter(|c| !anchor.column_indices.contains(c) && !t.cell(r, *c).is_empty)
                .count();
            let n = facts + usize::from(multi);
            n.max(1)
        })
        .sum()
}

proptest! {
    #[test]
    fn anchor_is_minimal_and_first(t in strategies::nonempty_table(8, 6)) {
        let got = detect_anchor(&t, 3);
        let first = (1..=3.min(t.n_cols()))
            .flat_map(|k| subsets(t.n_cols(), k))
            .find(|s| unique_under(&t, s));
        match first {
            Some(s) => {
                prop_assert!(!got.exhaustive);
                prop_assert_eq!(got.column_indices, s);
            }
            None => {
                prop_assert!(got.exhaustive);
                prop_assert_eq!(got.column_indices, (0..t.n_cols()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn unroll_count_law(t in strategies::nonempty_table(8, 6)) {
        let set = unroll_deterministic(&t).unwrap();
        prop_assert_eq!(set.len(), expected_count(&t));
    }

    #[test]
    fn permuting_rows_permutes_statements(
        t in strategies::nonempty_table(8, 5),
        seed in any::<u64>(),
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut order: Vec<usize> = (0..t.n_rows()).collect();
        order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let a: Vec<String> = unroll_deterministic(&t).unwrap().texts().map(String::from).collect();
        let b: Vec<String> = unroll_deterministic(&t.permute_rows(&order))
            .unwrap()
            .texts()
            .map(String::from)
            .collect();
        let mut a_sorted = a.clone();
        let mut b_sorted = b.clone();
        a_sorted.sort();
        b_sorted.sort();
        prop_assert_eq!(a_sorted, b_sorted);
    }

    #[test]
    fn statements_are_atomic_and_attributed(t in strategies::nonempty_table(8, 6)) {
        let set = unroll_deterministic(&t).unwrap();
        for st in &set.statements {
            let text = st.text();
            prop_assert!(!text.contains('\n'));
            prop_assert!(text.ends_with('.'));
            prop_assert_eq!(st.supporting_rows.len(), 1);
            prop_assert!(st.supporting_rows[0] < t.n_rows());
            // one fact per statement: either a single "the H is V" clause or an existence claim
            let fact = text.starts_with("For ");
            let exist = text.starts_with("In ") || text.starts_with("There is ");
            prop_assert!(fact ^ exist, "{}", text);
        }
        let report = validate_attribution(&set, &t, AttributionMode::Strict);
        prop_assert!(report.is_clean(), "{:?}", report.flags);
    }

    #[test]
    fn anchor_cap_is_respected(t in strategies::nonempty_table(6, 6), cap in 1usize..4) {
        let got = DeterministicUnroller { max_anchor_columns: cap }.unroll(&t).unwrap();
        prop_assert!(!got.is_empty());
        let anchor = detect_anchor(&t, cap);
        prop_assert!(anchor.exhaustive || anchor.column_indices.len() <= cap);
    }
}

#[test]
fn example2_yields_ten_statements() {
    let t = common::example2();
    let set = unroll_deterministic(&t).unwrap();
    assert_eq!(detect_anchor(&t, 3).column_indices, vec![1]);
    assert_eq!(set.len(), 10);
    assert_eq!(
        set.statements[0].text(),
        "For the Title Kidnapped: The Hannah Anderson Story in Isabella Rice - Film, the Year is 2015."
    );
    assert_eq!(
        set.statements[1].text(),
        "For the Title Kidnapped: The Hannah Anderson Story in Isabella Rice - Film, the Role is Becca McKinnon."
    );
}

#[test]
fn example1_yields_ten_not_eight() {
    let t = common::example1();
    let set = unroll_deterministic(&t).unwrap();
    assert_eq!(detect_anchor(&t, 3).column_indices, vec![0]);
    // Year alone is the anchor, so Competition is stated per row as well.
    assert_eq!(set.len(), 10);
    assert_ne!(set.len(), 8);
}

#[test]
fn example1_response_parses_to_eight() {
    let t = common::example1();
    let parsed = parse_unroll_response(common::EXAMPLE1_RESPONSE, Some(&t)).unwrap();
    assert_eq!(parsed.statements.len(), 8);
    assert!(parsed.unresolved_rows.is_empty());
    let rows: BTreeSet<usize> = parsed
        .statements
        .statements
        .iter()
        .flat_map(|s| s.supporting_rows.iter().copied())
        .collect();
    assert_eq!(rows, BTreeSet::from([0, 1]));
    for (i, s) in parsed.statements.statements.iter().enumerate() {
        assert_eq!(s.supporting_rows, vec![i / 4], "{}", s.text());
    }
}

#[test]
fn corpus_unrolls_cleanly() {
    for (id, t) in common::corpus() {
        let set = unroll_deterministic(&t).unwrap();
        assert_eq!(set.len(), expected_count(&t), "{id}");
        assert!(
            validate_attribution(&set, &t, AttributionMode::Strict).is_clean(),
            "{id}"
        );
    }
}
