//! Brute-force reference for the sufficiency metrics.
//!
//! Only uses the instance's gold sets and candidate count; shares no code
//! with `evirank_core::metrics`.

#![allow(dead_code)]

use std::collections::BTreeSet;

use evirank_core::ClaimInstance;

pub struct OracleScore {
    pub msr: usize,
    pub imsr: usize,
    pub rr: f64,
    pub sr: bool,
    pub ndcg: f64,
    pub g: BTreeSet<usize>,
}

fn gold(instance: &ClaimInstance) -> Vec<BTreeSet<usize>> {
    instance.gold_sets().iter().map(|g| g.members().collect()).collect()
}

pub fn suf(prefix: &BTreeSet<usize>, instance: &ClaimInstance) -> bool {
    gold(instance).iter().any(|g| g.is_subset(prefix))
}

/// Smallest i such that the first i ranked sentences are sufficient.
pub fn msr_scan(order: &[usize], instance: &ClaimInstance) -> usize {
    let mut prefix = BTreeSet::new();
    for (i, &s) in order.iter().enumerate() {
        prefix.insert(s);
        if suf(&prefix, instance) {
            return i + 1;
        }
    }
    panic!("no sufficient prefix")
}

/// All permutations of 0..n (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

pub fn imsr_brute(instance: &ClaimInstance) -> usize {
    permutations(instance.candidate_count())
        .iter()
        .map(|p| msr_scan(p, instance))
        .min()
        .unwrap()
}

/// Exhaustive search over subsets of the msr-prefix for the smallest
/// sufficient subset; ties go to the smallest maximum rank, then the
/// lexicographically smallest sorted rank list.
pub fn minimal_g(order: &[usize], instance: &ClaimInstance, msr: usize) -> BTreeSet<usize> {
    let prefix = &order[..msr];
    let mut best: Option<(usize, usize, Vec<usize>, BTreeSet<usize>)> = None;
    for mask in 1u64..(1u64 << msr) {
        let subset: BTreeSet<usize> = (0..msr).filter(|b| mask >> b & 1 == 1).map(|b| prefix[b]).collect();
        if !suf(&subset, instance) {
            continue;
        }
        let ranks: Vec<usize> = (0..msr).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let key = (subset.len(), *ranks.last().unwrap(), ranks.clone(), subset);
        if best.as_ref().map_or(true, |b| (key.0, key.1, &key.2) < (b.0, b.1, &b.2)) {
            best = Some(key);
        }
    }
    best.unwrap().3
}

pub fn score(order: &[usize], instance: &ClaimInstance) -> OracleScore {
    let msr = msr_scan(order, instance);
    let imsr = imsr_brute(instance);
    let rr = 1.0 / (msr - imsr + 1) as f64;
    let sr = suf(&order[..imsr].iter().copied().collect(), instance);
    let g = minimal_g(order, instance, msr);
    let mut dcg = 0.0;
    for (i, s) in order[..msr].iter().enumerate() {
        if g.contains(s) {
            dcg += 1.0 / ((i + 2) as f64).log2();
        }
    }
    let idcg: f64 = (1..=g.len()).map(|j| 1.0 / ((j + 1) as f64).log2()).sum();
    OracleScore { msr, imsr, rr, sr, ndcg: dcg / idcg, g }
}
