//! Constraint-driven stratified sampling.
//!
//! Instances fall into cells keyed by (source, single or multiple gold sets,
//! optimal gold size bucket 1/2/3/4+, verdict). Fractional cell targets are
//! fitted to three margins by iterative proportional fitting, seeded with the
//! pool counts and capped at them:
//!
//! * per source and verdict: the source count, split evenly when verdicts
//!   are balanced, otherwise in pool proportion;
//! * single vs. multiple gold sets, over the whole sample;
//! * optimal-size bucket, over the whole sample.
//!
//! Targets are rounded per source by largest remainder, and each cell is
//! filled from a seeded shuffle of its id-sorted members.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use evirank_core::{ClaimInstance, Source, Verdict};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const IPF_ROUNDS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceTarget {
    pub count: usize,
    /// Pool file, relative to the constraints file. Only the CLI reads it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConstraints {
    pub seed: u64,
    #[serde(default = "default_single_share")]
    pub single_set_share: f64,
    /// Shares of optimal gold size 1, 2 and 3; the rest is 4 and above.
    #[serde(default = "default_size_shares")]
    pub size_shares: [f64; 3],
    #[serde(default = "yes")]
    pub balance_verdicts: bool,
    /// Allowed deviation of each realized share, as a fraction.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub allow_partial: bool,
    pub sources: BTreeMap<String, SourceTarget>,
}

fn default_single_share() -> f64 {
    0.60
}
fn default_size_shares() -> [f64; 3] {
    [1.0 / 3.0, 1.0 / 3.0, 0.20]
}
fn yes() -> bool {
    true
}
fn default_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid sampling constraints: {0}")]
    Config(String),
    #[error("constraints are infeasible for this pool: {}", describe_shortfalls(&.0.shortfalls))]
    Infeasible(Box<SampleManifest>),
}

fn describe_shortfalls(v: &[Shortfall]) -> String {
    v.iter()
        .map(|s| format!("{} needs {} but {} available", s.stratum, s.target, s.available))
        .collect::<Vec<_>>()
        .join("; ")
}

impl SamplingConstraints {
    pub fn parse(text: &str) -> Result<Self, SampleError> {
        let c: SamplingConstraints = toml::from_str(text).map_err(|e| SampleError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a constraints file, resolving pool paths against its directory.
    pub fn load(path: &Path) -> Result<Self, SampleError> {
        let text = fs::read_to_string(path).map_err(|source| SampleError::Io { path: path.to_path_buf(), source })?;
        let mut c = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for t in c.sources.values_mut() {
            if let Some(p) = &t.pool {
                if p.is_relative() {
                    t.pool = Some(base.join(p));
                }
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let share = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SampleError::Config(format!("{name} = {v} is outside [0, 1]")))
            }
        };
        share("single_set_share", self.single_set_share)?;
        for (i, v) in self.size_shares.iter().enumerate() {
            share(&format!("size_shares[{i}]"), *v)?;
        }
        if self.size_shares.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(SampleError::Config("size_shares sum to more than 1".into()));
        }
        share("tolerance", self.tolerance)?;
        if self.sources.is_empty() {
            return Err(SampleError::Config("no sources configured".into()));
        }
        for (name, t) in &self.sources {
            name.parse::<Source>().map_err(|_| SampleError::Config(format!("unknown source {name:?}")))?;
            if t.count == 0 {
                return Err(SampleError::Config(format!("sources.{name}.count must be positive")));
            }
        }
        Ok(())
    }

    pub fn targets(&self) -> BTreeMap<Source, usize> {
        self.sources.iter().map(|(k, v)| (k.parse().expect("validated"), v.count)).collect()
    }

    fn bucket_shares(&self) -> [f64; 4] {
        let [a, b, c] = self.size_shares;
        [a, b, c, (1.0 - a - b - c).max(0.0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cell {
    source: Source,
    multi: bool,
    bucket: usize,
    verdict: Verdict,
}

fn cell_of(inst: &ClaimInstance) -> Cell {
    Cell {
        source: inst.source(),
        multi: inst.gold_sets().len() > 1,
        bucket: inst.optimal_gold_size().clamp(1, 4) - 1,
        verdict: inst.verdict(),
    }
}

const BUCKET_NAMES: [&str; 4] = ["size=1", "size=2", "size=3", "size=4+"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub stratum: String,
    pub target_share: f64,
    pub realized_share: f64,
    pub target: usize,
    pub realized: usize,
    pub available: usize,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shortfall {
    pub stratum: String,
    pub target: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleManifest {
    pub seed: u64,
    pub tolerance: f64,
    pub total: usize,
    pub strata: Vec<StratumReport>,
    pub shortfalls: Vec<Shortfall>,
    pub feasible: bool,
    /// Ids of the selected instances, in output order.
    pub ids: Vec<String>,
}

impl SampleManifest {
    pub fn stratum(&self, name: &str) -> Option<&StratumReport> {
        self.strata.iter().find(|s| s.stratum == name)
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub instances: Vec<ClaimInstance>,
    pub manifest: SampleManifest,
}

/// Draws a sample meeting `constraints`. When the pool cannot satisfy them
/// the partial sample is returned only if `allow_partial` is set; otherwise
/// the error carries the manifest naming the short strata.
pub fn sample_benchmark(instances: &[ClaimInstance], constraints: &SamplingConstraints) -> Result<Sample, SampleError> {
    constraints.validate()?;
    let targets = constraints.targets();

    let mut members: BTreeMap<Cell, Vec<&ClaimInstance>> = BTreeMap::new();
    for inst in instances.iter().filter(|i| targets.contains_key(&i.source())) {
        members.entry(cell_of(inst)).or_default().push(inst);
    }
    for list in members.values_mut() {
        list.sort_by(|a, b| a.id().cmp(b.id()));
        list.dedup_by(|a, b| a.id() == b.id());
    }
    let cells: Vec<Cell> = members.keys().copied().collect();
    let pool: Vec<f64> = cells.iter().map(|c| members[c].len() as f64).collect();

    let fitted = fit(&cells, &pool, &targets, constraints);
    let alloc = allocate(&cells, &pool, &fitted, &targets);

    let mut rng = ChaCha8Rng::seed_from_u64(constraints.seed);
    let mut chosen: Vec<&ClaimInstance> = Vec::new();
    for (cell, k) in cells.iter().zip(&alloc) {
        let mut list = members[cell].clone();
        list.shuffle(&mut rng);
        chosen.extend(list.into_iter().take(*k));
    }
    chosen.sort_by(|a, b| a.source().cmp(&b.source()).then_with(|| a.id().cmp(b.id())));
    let out: Vec<ClaimInstance> = chosen.into_iter().cloned().collect();

    let manifest = build_manifest(&out, &cells, &pool, &targets, constraints);
    if manifest.feasible {
        tracing::info!(total = manifest.total, "sample within tolerance");
    } else {
        for s in &manifest.shortfalls {
            tracing::warn!(stratum = s.stratum.as_str(), target = s.target, available = s.available, "short stratum");
        }
        if !constraints.allow_partial {
            return Err(SampleError::Infeasible(Box::new(manifest)));
        }
    }
    Ok(Sample { instances: out, manifest })
}

type Margin = Vec<(Vec<usize>, f64)>;

fn margins(cells: &[Cell], pool: &[f64], targets: &BTreeMap<Source, usize>, c: &SamplingConstraints) -> Vec<Margin> {
    let total: f64 = targets.values().sum::<usize>() as f64;
    let group = |key: &dyn Fn(&Cell) -> Option<usize>, n: usize| -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); n];
        for (i, cell) in cells.iter().enumerate() {
            if let Some(k) = key(cell) {
                g[k].push(i);
            }
        }
        g
    };

    let mut source_verdict = Margin::new();
    for (&source, &count) in targets {
        let verdicts = [Verdict::Supported, Verdict::Refuted];
        let avail: Vec<f64> = verdicts
            .iter()
            .map(|v| {
                cells.iter().zip(pool).filter(|(c, _)| c.source == source && c.verdict == *v).map(|(_, p)| p).sum()
            })
            .collect();
        let avail_total: f64 = avail.iter().sum();
        for (vi, v) in verdicts.iter().enumerate() {
            let share = if c.balance_verdicts {
                0.5
            } else if avail_total > 0.0 {
                avail[vi] / avail_total
            } else {
                0.0
            };
            let idx = cells.iter().enumerate().filter(|(_, x)| x.source == source && x.verdict == *v).map(|(i, _)| i).collect();
            source_verdict.push((idx, count as f64 * share));
        }
    }

    let multi = group(&|x| Some(x.multi as usize), 2);
    let single_multi = vec![
        (multi[0].clone(), total * c.single_set_share),
        (multi[1].clone(), total * (1.0 - c.single_set_share)),
    ];
    let buckets = group(&|x| Some(x.bucket), 4);
    let shares = c.bucket_shares();
    let size = buckets.into_iter().zip(shares).map(|(idx, s)| (idx, total * s)).collect();

    vec![source_verdict, single_multi, size]
}

fn fit(cells: &[Cell], pool: &[f64], targets: &BTreeMap<Source, usize>, c: &SamplingConstraints) -> Vec<f64> {
    let margins = margins(cells, pool, targets, c);
    let mut x = pool.to_vec();
    for _ in 0..IPF_ROUNDS {
        let mut worst: f64 = 0.0;
        for margin in &margins {
            for (idx, target) in margin {
                let sum: f64 = idx.iter().map(|&i| x[i]).sum();
                worst = worst.max((sum - target).abs());
                if sum > 0.0 {
                    let f = target / sum;
                    for &i in idx {
                        x[i] = (x[i] * f).min(pool[i]);
                    }
                }
            }
        }
        if worst < 1e-9 {
            break;
        }
    }
    x
}

/// Integer counts per cell: largest remainder within each source, then any
/// deficit goes to cells with spare members, largest shortfall first.
fn allocate(cells: &[Cell], pool: &[f64], fitted: &[f64], targets: &BTreeMap<Source, usize>) -> Vec<usize> {
    let mut alloc: Vec<usize> = fitted.iter().map(|v| v.floor() as usize).collect();
    for (&source, &count) in targets {
        let idx: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].source == source).collect();
        let cap = |i: usize| pool[i] as usize;
        let mut have: usize = idx.iter().map(|&i| alloc[i]).sum();

        let mut by_remainder = idx.clone();
        by_remainder.sort_by(|&a, &b| {
            let ra = fitted[a] - fitted[a].floor();
            let rb = fitted[b] - fitted[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in &by_remainder {
            if have >= count {
                break;
            }
            if alloc[i] < cap(i) && fitted[i] - fitted[i].floor() > 0.0 {
                alloc[i] += 1;
                have += 1;
            }
        }
        while have < count {
            let best = idx
                .iter()
                .copied()
                .filter(|&i| alloc[i] < cap(i))
                .max_by(|&a, &b| (fitted[a] - alloc[a] as f64).total_cmp(&(fitted[b] - alloc[b] as f64)).then(b.cmp(&a)));
            match best {
                Some(i) => {
                    alloc[i] += 1;
                    have += 1;
                }
                None => break,
            }
        }
    }
    alloc
}

fn build_manifest(
    out: &[ClaimInstance],
    cells: &[Cell],
    pool: &[f64],
    targets: &BTreeMap<Source, usize>,
    c: &SamplingConstraints,
) -> SampleManifest {
    let total_target: usize = targets.values().sum();
    let realized_cells: Vec<Cell> = out.iter().map(cell_of).collect();
    let n = out.len();
    let mut strata = Vec::new();

    let mut push = |name: String, share: f64, denom_target: usize, denom: usize, pred: &dyn Fn(&Cell) -> bool| {
        let realized = realized_cells.iter().filter(|x| pred(x)).count();
        let available = cells.iter().zip(pool).filter(|(x, _)| pred(x)).map(|(_, p)| *p as usize).sum();
        let realized_share = if denom == 0 { 0.0 } else { realized as f64 / denom as f64 };
        strata.push(StratumReport {
            stratum: name,
            target_share: share,
            realized_share,
            target: (share * denom_target as f64).round() as usize,
            realized,
            available,
            within_tolerance: denom > 0 && (realized_share - share).abs() <= c.tolerance + 1e-12,
        });
    };

    push("single".into(), c.single_set_share, total_target, n, &|x| !x.multi);
    push("multi".into(), 1.0 - c.single_set_share, total_target, n, &|x| x.multi);
    for (b, share) in c.bucket_shares().into_iter().enumerate() {
        push(BUCKET_NAMES[b].into(), share, total_target, n, &|x| x.bucket == b);
    }
    let per_source: HashMap<Source, usize> =
        targets.keys().map(|s| (*s, realized_cells.iter().filter(|x| x.source == *s).count())).collect();
    for (&source, &count) in targets {
        let got = per_source[&source];
        for v in [Verdict::Supported, Verdict::Refuted] {
            let share = if c.balance_verdicts {
                0.5
            } else {
                let all: f64 = cells.iter().zip(pool).filter(|(x, _)| x.source == source).map(|(_, p)| p).sum();
                let of_v: f64 =
                    cells.iter().zip(pool).filter(|(x, _)| x.source == source && x.verdict == v).map(|(_, p)| p).sum();
                if all > 0.0 { of_v / all } else { 0.0 }
            };
            push(format!("{source}/{v}"), share, count, got, &|x| x.source == source && x.verdict == v);
        }
    }

    let mut shortfalls = Vec::new();
    for (&source, &count) in targets {
        let available = cells.iter().zip(pool).filter(|(x, _)| x.source == source).map(|(_, p)| *p as usize).sum();
        if per_source[&source] < count {
            shortfalls.push(Shortfall { stratum: source.to_string(), target: count, available });
        }
    }
    for s in &strata {
        if !s.within_tolerance && s.realized < s.target {
            shortfalls.push(Shortfall { stratum: s.stratum.clone(), target: s.target, available: s.available });
        }
    }
    let feasible = shortfalls.is_empty() && strata.iter().all(|s| s.within_tolerance);

    SampleManifest {
        seed: c.seed,
        tolerance: c.tolerance,
        total: n,
        strata,
        shortfalls,
        feasible,
        ids: out.iter().map(|i| i.id().to_string()).collect(),
    }
}
