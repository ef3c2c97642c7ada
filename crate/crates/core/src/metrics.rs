//! Sufficiency-aware ranking metrics.
//!
//! A reader walks down a ranking and stops at the first prefix that contains
//! a complete gold evidence set. The length of that prefix is the minimal
//! sufficient rank (MSR); the best achievable MSR over all orderings is the
//! ideal MSR (IMSR), which is simply the size of the smallest gold set.
//!
//! From these two numbers:
//!
//! * reciprocal rank `rr = 1 / (msr - imsr + 1)`,
//! * success `sr = (msr == imsr)`,
//! * NDCG restricted to the MSR prefix, with binary relevance given by the
//!   smallest gold set `G` completed inside that prefix.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{positions_of, ClaimInstance, GoldEvidenceSet, Ranking, RankingError};
use crate::scalar::{round6, Scalar};

impl AsRef<[usize]> for Ranking {
    fn as_ref(&self) -> &[usize] {
        &self.order
    }
}

/// True iff some gold set is contained in `prefix`.
pub fn is_sufficient<I>(prefix: I, instance: &ClaimInstance) -> bool
where
    I: IntoIterator<Item = usize>,
{
    let mut mask = vec![false; instance.candidate_count()];
    for i in prefix {
        if let Some(m) = mask.get_mut(i) {
            *m = true;
        }
    }
    instance.gold_sets().iter().any(|g| g.members().all(|i| mask[i]))
}

/// Rank (1-based) at which the last member of `gold` is read.
fn completion_rank(positions: &[usize], gold: &GoldEvidenceSet) -> usize {
    gold.members().map(|i| positions[i]).max().unwrap_or(0)
}

/// Minimal sufficient rank: the shortest sufficient prefix of `ranking`.
///
/// Computed as the minimum over gold sets of the rank at which the set is
/// completed. `ranking` must be a permutation of the instance's candidates.
pub fn msr<R: AsRef<[usize]>>(ranking: &R, instance: &ClaimInstance) -> usize {
    let positions = positions_of(ranking.as_ref());
    instance
        .gold_sets()
        .iter()
        .map(|g| completion_rank(&positions, g))
        .min()
        .expect("validated instances have at least one gold set")
}

/// Ideal minimal sufficient rank: the size of the smallest gold set.
pub fn imsr(instance: &ClaimInstance) -> usize {
    instance.optimal_gold_size()
}

/// Reciprocal rank with its exact form and the extra-reading interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReciprocalRank {
    /// `msr - imsr + 1`
    pub rank: usize,
    pub exact: Ratio<u64>,
    /// Sentences read beyond the minimal sufficient set, `1/rr - 1`.
    pub extra_reading: usize,
}

impl ReciprocalRank {
    pub fn from_ranks(msr: usize, imsr: usize) -> Self {
        assert!(msr >= imsr && imsr >= 1, "msr {msr} must be >= imsr {imsr} >= 1");
        let rank = msr - imsr + 1;
        ReciprocalRank { rank, exact: Ratio::new(1, rank as u64), extra_reading: rank - 1 }
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::one() / T::from_usize_lossy(self.rank)
    }
}

pub fn reciprocal_rank<R: AsRef<[usize]>>(ranking: &R, instance: &ClaimInstance) -> ReciprocalRank {
    ReciprocalRank::from_ranks(msr(ranking, instance), imsr(instance))
}

/// Whether the prefix of length IMSR is already sufficient.
pub fn success<R: AsRef<[usize]>>(ranking: &R, instance: &ClaimInstance) -> bool {
    let k = imsr(instance);
    is_sufficient(ranking.as_ref()[..k].iter().copied(), instance)
}

/// The gold set that defines relevance for NDCG.
///
/// Among gold sets completed within the MSR prefix, the smallest one wins.
/// Ties go to the set completed earliest, then to the lexicographically
/// smallest sorted list of member ranks.
pub fn covering_gold_set<'a, R: AsRef<[usize]>>(ranking: &R, instance: &'a ClaimInstance) -> &'a GoldEvidenceSet {
    let positions = positions_of(ranking.as_ref());
    let cutoff = instance
        .gold_sets()
        .iter()
        .map(|g| completion_rank(&positions, g))
        .min()
        .expect("validated instances have at least one gold set");
    instance
        .gold_sets()
        .iter()
        .filter(|g| completion_rank(&positions, g) <= cutoff)
        .min_by_key(|g| {
            let mut ranks: Vec<usize> = g.members().map(|i| positions[i]).collect();
            ranks.sort_unstable();
            (g.len(), completion_rank(&positions, g), ranks)
        })
        .expect("the set attaining msr is always a candidate")
}

fn discount<T: Scalar>(rank: usize) -> T {
    T::one() / T::from_usize_lossy(rank + 1).log2()
}

/// NDCG over the MSR prefix with binary relevance from [`covering_gold_set`].
pub fn ndcg<T: Scalar, R: AsRef<[usize]>>(ranking: &R, instance: &ClaimInstance) -> T {
    let order = ranking.as_ref();
    let m = msr(ranking, instance);
    let g = covering_gold_set(ranking, instance);
    let dcg: T = order[..m]
        .iter()
        .enumerate()
        .filter(|(_, idx)| g.contains(**idx))
        .map(|(i, _)| discount::<T>(i + 1))
        .sum();
    let idcg: T = (1..=g.len()).map(discount::<T>).sum();
    dcg / idcg
}

fn ser_scalar<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round6(v.to_f64_lossy()))
}

fn de_scalar<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
    let v = f64::deserialize(d)?;
    Ok(T::from_f64_lossy(v))
}

/// All per-instance metrics for one ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InstanceScore<T> {
    pub instance_id: String,
    pub msr: usize,
    pub imsr: usize,
    pub rank: usize,
    #[serde(serialize_with = "ser_scalar", deserialize_with = "de_scalar")]
    pub rr: T,
    pub sr: bool,
    #[serde(serialize_with = "ser_scalar", deserialize_with = "de_scalar")]
    pub ndcg: T,
    pub covering_gold_set: Vec<usize>,
    pub optimal_gold_size: usize,
    pub candidate_count: usize,
}

impl<T: Scalar> InstanceScore<T> {
    pub fn extra_reading(&self) -> usize {
        self.rank - 1
    }

    pub fn size_bucket(&self) -> SizeBucket {
        SizeBucket::of(self.optimal_gold_size)
    }
}

pub fn score_instance<T: Scalar>(ranking: &Ranking, instance: &ClaimInstance) -> Result<InstanceScore<T>, RankingError> {
    ranking.check(instance)?;
    let m = msr(ranking, instance);
    let i = imsr(instance);
    let rr = ReciprocalRank::from_ranks(m, i);
    Ok(InstanceScore {
        instance_id: instance.id().to_string(),
        msr: m,
        imsr: i,
        rank: rr.rank,
        rr: rr.value(),
        sr: success(ranking, instance),
        ndcg: ndcg(ranking, instance),
        covering_gold_set: covering_gold_set(ranking, instance).to_vec(),
        optimal_gold_size: i,
        candidate_count: instance.candidate_count(),
    })
}

/// Segmentation of instances by the size of their smallest gold set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeBucket {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3+")]
    ThreePlus,
}

impl SizeBucket {
    pub const ALL: [SizeBucket; 3] = [SizeBucket::One, SizeBucket::Two, SizeBucket::ThreePlus];

    pub fn of(optimal_size: usize) -> Self {
        match optimal_size {
            0 | 1 => SizeBucket::One,
            2 => SizeBucket::Two,
            _ => SizeBucket::ThreePlus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeBucket::One => "1",
            SizeBucket::Two => "2",
            SizeBucket::ThreePlus => "3+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricSummary<T> {
    #[serde(serialize_with = "ser_scalar", deserialize_with = "de_scalar")]
    pub mean: T,
    #[serde(serialize_with = "ser_scalar", deserialize_with = "de_scalar")]
    pub sem: T,
    pub n: usize,
}

impl<T: Scalar> MetricSummary<T> {
    /// Mean and standard error (sample standard deviation over `sqrt(n)`).
    /// A single observation has SEM 0.
    pub fn from_values(values: &[T]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let nf = T::from_usize_lossy(n);
        let mean = values.iter().copied().sum::<T>() / nf;
        let sem = if n < 2 {
            T::zero()
        } else {
            let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
            let sd = (ss / T::from_usize_lossy(n - 1)).sqrt();
            sd / nf.sqrt()
        };
        Some(MetricSummary { mean, sem, n })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot aggregate an empty run")]
    EmptyRun,
}

/// Dataset-level summary of a list of instance scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AggregateReport<T> {
    pub n: usize,
    pub mrr: MetricSummary<T>,
    /// Success as a proportion in [0, 1].
    pub sr: MetricSummary<T>,
    pub ndcg: MetricSummary<T>,
    pub mrr_by_optimal_size: BTreeMap<SizeBucket, MetricSummary<T>>,
    /// `verified_at_k[k-1]`: share of instances whose MSR is exactly `k`.
    #[serde(serialize_with = "ser_vec", deserialize_with = "de_vec")]
    pub verified_at_k: Vec<T>,
    /// `cumulative_recall[k-1]`: share of instances whose MSR is at most `k`.
    #[serde(serialize_with = "ser_vec", deserialize_with = "de_vec")]
    pub cumulative_recall: Vec<T>,
}

fn ser_vec<T: Scalar, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&round6(x.to_f64_lossy()))?;
    }
    seq.end()
}

fn de_vec<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
    let v = Vec::<f64>::deserialize(d)?;
    Ok(v.into_iter().map(T::from_f64_lossy).collect())
}

/// Aggregates scores. The result does not depend on input order: scores are
/// sorted by instance id before any summation.
pub fn aggregate<T: Scalar>(scores: &[InstanceScore<T>]) -> Result<AggregateReport<T>, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyRun);
    }
    let mut sorted: Vec<&InstanceScore<T>> = scores.iter().collect();
    sorted.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));

    let bool_val = |b: bool| if b { T::one() } else { T::zero() };
    let rr: Vec<T> = sorted.iter().map(|s| s.rr).collect();
    let sr: Vec<T> = sorted.iter().map(|s| bool_val(s.sr)).collect();
    let nd: Vec<T> = sorted.iter().map(|s| s.ndcg).collect();

    let mut by_bucket = BTreeMap::new();
    for bucket in SizeBucket::ALL {
        let vals: Vec<T> = sorted.iter().filter(|s| s.size_bucket() == bucket).map(|s| s.rr).collect();
        if let Some(summary) = MetricSummary::from_values(&vals) {
            by_bucket.insert(bucket, summary);
        }
    }

    let n = sorted.len();
    let max_k = sorted.iter().map(|s| s.candidate_count.max(s.msr)).max().unwrap_or(0);
    let mut counts = vec![0usize; max_k];
    for s in &sorted {
        counts[s.msr - 1] += 1;
    }
    let nf = T::from_usize_lossy(n);
    let verified_at_k = counts.iter().map(|&c| T::from_usize_lossy(c) / nf).collect();
    let mut running = 0usize;
    let cumulative_recall = counts
        .iter()
        .map(|&c| {
            running += c;
            T::from_usize_lossy(running) / nf
        })
        .collect();

    Ok(AggregateReport {
        n,
        mrr: MetricSummary::from_values(&rr).expect("non-empty"),
        sr: MetricSummary::from_values(&sr).expect("non-empty"),
        ndcg: MetricSummary::from_values(&nd).expect("non-empty"),
        mrr_by_optimal_size: by_bucket,
        verified_at_k,
        cumulative_recall,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{validate_instance, Provenance, RawInstance, RawSentence};

    fn instance(n: usize, gold: &[&[i64]]) -> ClaimInstance {
        validate_instance(RawInstance {
            id: "t".into(),
            claim: "claim".into(),
            candidates: (0..n).map(|i| RawSentence::Text(format!("s{i}"))).collect(),
            gold_sets: gold.iter().map(|g| g.to_vec()).collect(),
            verdict: "REFUTED".into(),
            source: "OTHER".into(),
            metadata: BTreeMap::new(),
        })
        .unwrap()
    }

    fn ranking(order: &[usize]) -> Ranking {
        Ranking { instance_id: "t".into(), order: order.to_vec(), provenance: Provenance::default() }
    }

    #[test]
    fn empty_prefix_is_never_sufficient() {
        let inst = instance(4, &[&[1], &[2, 3]]);
        assert!(!is_sufficient(std::iter::empty(), &inst));
        assert!(is_sufficient(0..4, &inst));
    }

    #[test]
    fn single_gold_ranked_first() {
        let inst = instance(3, &[&[2]]);
        let r = ranking(&[2, 0, 1]);
        assert_eq!(msr(&r, &inst), 1);
        assert_eq!(imsr(&inst), 1);
        assert!(success(&r, &inst));
        assert_eq!(ndcg::<f64, _>(&r, &inst), 1.0);
    }

    #[test]
    fn reciprocal_rank_formula() {
        let rr = ReciprocalRank::from_ranks(3, 2);
        assert_eq!(rr.value::<f64>(), 0.5);
        assert_eq!(rr.extra_reading, 1);
        let rr = ReciprocalRank::from_ranks(7, 2);
        assert_eq!(rr.exact, Ratio::new(1, 6));
        assert_eq!(ReciprocalRank::from_ranks(4, 4).value::<f32>(), 1.0);
    }

    #[test]
    fn ndcg_two_members_at_ranks_one_and_three() {
        // DCG = 1 + 1/2, IDCG = 1 + 1/log2(3)
        let inst = instance(4, &[&[0, 1]]);
        let r = ranking(&[0, 2, 1, 3]);
        let v: f64 = ndcg(&r, &inst);
        let expected = 1.5 / (1.0 + 1.0 / 3f64.log2());
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.919_720).abs() < 1e-6);
    }

    #[test]
    fn ndcg_tie_break_prefers_earliest_completion() {
        // Gold {0,1} and {2,3}; ranking 0 2 1 3: msr = 3 via {0,1}.
        let inst = instance(4, &[&[0, 1], &[2, 3]]);
        let r = ranking(&[0, 2, 1, 3]);
        assert_eq!(covering_gold_set(&r, &inst).to_vec(), vec![0, 1]);
        // {0,2} and {1,2} both complete at rank 3; member ranks [1,3] < [2,3].
        let inst = instance(3, &[&[0, 2], &[1, 2]]);
        let r = ranking(&[0, 1, 2]);
        assert_eq!(msr(&r, &inst), 3);
        assert_eq!(covering_gold_set(&r, &inst).to_vec(), vec![0, 2]);
        let r = ranking(&[1, 0, 2]);
        assert_eq!(covering_gold_set(&r, &inst).to_vec(), vec![1, 2]);
    }

    #[test]
    fn aggregate_mean_and_sem() {
        let mk = |id: &str, rr: f64| InstanceScore {
            instance_id: id.into(),
            msr: 1,
            imsr: 1,
            rank: 1,
            rr,
            sr: rr == 1.0,
            ndcg: 1.0,
            covering_gold_set: vec![0],
            optimal_gold_size: 5,
            candidate_count: 3,
        };
        let rep = aggregate(&[mk("a", 1.0), mk("b", 0.5)]).unwrap();
        assert!((rep.mrr.mean - 0.75).abs() < 1e-12);
        assert!((rep.mrr.sem - 0.25).abs() < 1e-12);
        assert!(rep.mrr_by_optimal_size.contains_key(&SizeBucket::ThreePlus));
        assert_eq!(aggregate::<f64>(&[]), Err(MetricsError::EmptyRun));
    }

    #[test]
    fn score_rejects_non_permutation() {
        let inst = instance(3, &[&[0]]);
        assert!(score_instance::<f64>(&ranking(&[0, 0, 1]), &inst).is_err());
    }

    #[test]
    fn instance_score_serializes_rounded() {
        let inst = instance(4, &[&[0, 1]]);
        let s: InstanceScore<f64> = score_instance(&ranking(&[0, 2, 1, 3]), &inst).unwrap();
        let line = serde_json::to_string(&s).unwrap();
        assert!(line.contains("\"ndcg\":0.91972"), "{line}");
        let back: InstanceScore<f64> = serde_json::from_str(&line).unwrap();
        assert_eq!(back.msr, 3);
    }
}
