use std::collections::BTreeMap;

use evirank_core::{validate_instance, ClaimInstance, RawInstance, RawSentence, Source};
use evirank_ingest::benchmark_stats;
use proptest::prelude::*;

fn inst(id: &str, source: Source, n: usize, gold: Vec<Vec<i64>>) -> ClaimInstance {
    validate_instance(RawInstance {
        id: id.into(),
        claim: "c".into(),
        candidates: (0..n).map(|i| RawSentence::Text(format!("s{i}"))).collect(),
        gold_sets: gold,
        verdict: "SUPPORTED".into(),
        source: source.as_str().into(),
        metadata: BTreeMap::new(),
    })
    .unwrap()
}

#[test]
fn single_instance_arithmetic() {
    let s = benchmark_stats(&[inst("a", Source::Fever, 10, vec![vec![0], vec![1, 2]])]);
    let row = s.get(Source::Fever).unwrap();
    assert_eq!(row.instances, 1);
    assert_eq!(row.mean_candidates, 10.0);
    assert_eq!(row.mean_gold_sets, 2.0);
    assert_eq!(row.mean_gold_size, 1.5);
    assert_eq!(row.mean_optimal_size, 1.0);
}

#[test]
fn table_layout() {
    let s = benchmark_stats(&[
        inst("a", Source::Fever, 10, vec![vec![0], vec![1, 2]]),
        inst("b", Source::Hover, 30, vec![vec![0, 1, 2]]),
        inst("c", Source::Wice, 33, vec![vec![0, 1], vec![2, 3]]),
    ]);
    let t = s.render();
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("Statistic"));
    assert!(lines[0].ends_with("FEVER  HOVER  WICE"), "{t}");
    assert!(lines[2].starts_with("Number of Instances"));
    assert!(lines[3].starts_with("Avg. Candidate Evidence Set Size (Sents)"));
    assert!(lines[3].ends_with("10.0   30.0  33.0"), "{t}");
    assert!(lines[6].starts_with("Avg. Optimal Gold Evidence Set Size (Sents)"));
}

fn arb_instances(tag: &'static str) -> impl Strategy<Value = Vec<ClaimInstance>> {
    prop::collection::vec((1usize..4, 1usize..4, 0usize..6), 1..12).prop_map(move |specs| {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (sets, size, extra))| {
                let gold: Vec<Vec<i64>> =
                    (0..sets).map(|k| ((k * size) as i64..((k + 1) * size) as i64).collect()).collect();
                inst(&format!("{tag}{i}"), Source::Fever, sets * size + extra, gold)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn union_is_weighted_mean(x in arb_instances("x"), y in arb_instances("y")) {
        let sx = benchmark_stats(&x).rows[0].clone();
        let sy = benchmark_stats(&y).rows[0].clone();
        let all: Vec<_> = x.iter().chain(&y).cloned().collect();
        let su = benchmark_stats(&all).rows[0].clone();
        let (nx, ny) = (sx.instances as f64, sy.instances as f64);
        let w = |a: f64, b: f64| (a * nx + b * ny) / (nx + ny);
        prop_assert_eq!(su.instances, sx.instances + sy.instances);
        prop_assert!((su.mean_candidates - w(sx.mean_candidates, sy.mean_candidates)).abs() < 1e-9);
        prop_assert!((su.mean_gold_sets - w(sx.mean_gold_sets, sy.mean_gold_sets)).abs() < 1e-9);
        prop_assert!((su.mean_gold_size - w(sx.mean_gold_size, sy.mean_gold_size)).abs() < 1e-9);
        prop_assert!((su.mean_optimal_size - w(sx.mean_optimal_size, sy.mean_optimal_size)).abs() < 1e-9);
    }
}
