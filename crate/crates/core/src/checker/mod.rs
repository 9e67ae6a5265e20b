//! Bounded classification under the Armendariz-type conditions.
//!
//! For bounds `(df, dg)` the checker decides whether every pair of nonzero
//! polynomials `f`, `g` with `deg f <= df`, `deg g <= dg` and `f g = 0` has
//! all coefficient products `a_i b_j` inside a target set: `{0}`
//! (Armendariz), the nilpotents (weak Armendariz) or the Jacobson radical
//! (J-Armendariz). A `Verified` verdict is a statement about those bounds
//! only.

mod search;
pub mod suite;
pub mod theorems;

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use search::FiberIndex;
use search::{count_of_degree, decode_f, FOutcome, Searcher};

use crate::error::{Error, Result};
use crate::poly::convolve;
use crate::ring::{FiniteRing, TableRing};
use crate::structure::{
    self, in_radical_direct, jacobson_radical, nilpotent_in_table, ElementSet, SetKind,
};

pub const DEFAULT_BUDGET: u128 = 10_000_000;
pub const DEFAULT_TRIALS: u64 = 100_000;
const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TargetKind {
    /// Products must vanish.
    Zero,
    /// Products must be nilpotent.
    Nil,
    /// Products must lie in the Jacobson radical.
    Jac,
}

impl TargetKind {
    pub fn property(self) -> &'static str {
        match self {
            TargetKind::Zero => "Armendariz",
            TargetKind::Nil => "weak Armendariz",
            TargetKind::Jac => "J-Armendariz",
        }
    }
}

/// A target kind resolved against a ring.
#[derive(Clone, Debug)]
pub struct TargetSet {
    pub kind: TargetKind,
    pub resolved: ElementSet,
}

impl TargetSet {
    pub fn resolve(ring: &FiniteRing, kind: TargetKind) -> Result<Self> {
        let resolved = match kind {
            TargetKind::Zero => ElementSet::from_members(ring, SetKind::Ideal, &[0]),
            TargetKind::Nil => structure::nilpotents(ring)?,
            TargetKind::Jac => jacobson_radical(ring)?,
        };
        Ok(TargetSet { kind, resolved })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub deg_f: usize,
    pub deg_g: usize,
}

impl Bounds {
    pub fn new(deg_f: usize, deg_g: usize) -> Self {
        Bounds { deg_f, deg_g }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Sampled { trials: u64 },
}

impl SearchMode {
    /// Exhaustive when the enumeration estimate fits the budget, sampled
    /// otherwise.
    pub fn auto(size: u128, bounds: Bounds, budget: u128, trials: u64) -> Self {
        if enumeration_estimate(size, bounds) <= budget {
            SearchMode::Exhaustive
        } else {
            SearchMode::Sampled { trials }
        }
    }
}

/// `size^(df + 1)`, saturating.
pub fn enumeration_estimate(size: u128, bounds: Bounds) -> u128 {
    (0..=bounds.deg_f).fold(1u128, |acc, _| acc.saturating_mul(size))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    Counterexample,
    Unknown,
}

/// Annihilating pair with a coefficient product outside the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub f: Vec<String>,
    pub g: Vec<String>,
    pub offending: (usize, usize),
    pub product: String,
    pub target: TargetKind,
    pub target_size: usize,
    /// Powers of the product up to the first repeat (weak target only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_trace: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SearchStats {
    /// Candidate `f` polynomials examined, in canonical order, up to and
    /// including the witness.
    pub f_examined: u64,
    /// Leaves of the `g` backtracking over those candidates.
    pub g_leaves: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub ring_expr: String,
    pub ring_size: usize,
    pub target: TargetKind,
    pub bounds: Bounds,
    pub mode: SearchMode,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub stats: SearchStats,
}

impl ClassificationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Worker threads; affects throughput only.
    pub workers: usize,
    pub budget: u128,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            budget: DEFAULT_BUDGET,
            seed: 0x004a_5249_4e47,
        }
    }
}

impl SearchConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }
}

/// Wall-clock time is not part of a result's identity.
impl PartialEq for SearchStats {
    fn eq(&self, other: &Self) -> bool {
        (self.f_examined, self.g_leaves) == (other.f_examined, other.g_leaves)
    }
}

impl Eq for SearchStats {}

/// `{b : a b = c}` in element order.
pub fn annihilator_fiber(ring: &FiniteRing, a: usize, c: usize) -> Result<Vec<usize>> {
    let t = ring.require_table()?;
    if a >= t.size() || c >= t.size() {
        return Err(Error::ForeignElement { ring: ring.name().to_string() });
    }
    Ok(FiberIndex::new(t).fiber(a, c).iter().map(|&b| b as usize).collect())
}

pub fn classify(
    ring: &FiniteRing,
    target: TargetKind,
    bounds: Bounds,
    mode: SearchMode,
    config: &SearchConfig,
) -> Result<ClassificationReport> {
    let target = TargetSet::resolve(ring, target)?;
    classify_with_target(ring, &target, bounds, mode, config)
}

pub fn classify_with_target(
    ring: &FiniteRing,
    target: &TargetSet,
    bounds: Bounds,
    mode: SearchMode,
    config: &SearchConfig,
) -> Result<ClassificationReport> {
    let started = Instant::now();
    let t = ring.require_table()?;
    let s = t.size() as u64;
    if let SearchMode::Exhaustive = mode {
        let estimate = enumeration_estimate(s as u128, bounds);
        if estimate > config.budget {
            return Err(Error::BudgetExceeded { estimate, budget: config.budget });
        }
    }
    let in_target = target.resolved.mask();
    let row_safe: Vec<bool> = (0..t.size())
        .into_par_iter()
        .map(|a| t.mul_row(a).iter().all(|&v| in_target[v as usize]))
        .collect();
    let fibers = FiberIndex::new(t);
    let searcher = Searcher {
        t,
        fibers: &fibers,
        in_target,
        row_safe: &row_safe,
        deg_g: bounds.deg_g,
    };

    let pool = if config.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?,
        )
    } else {
        None
    };
    let run_chunk = |fs: &[Vec<usize>]| -> Vec<FOutcome> {
        match &pool {
            Some(p) => p.install(|| fs.par_iter().map(|f| searcher.search(f)).collect()),
            None => fs.iter().map(|f| searcher.search(f)).collect(),
        }
    };

    let mut stats = SearchStats::default();
    let mut found = None;
    // trivial ring: no nonzero polynomials
    if s > 1 {
        match mode {
            SearchMode::Exhaustive => {
                let total: u64 = (0..=bounds.deg_f).map(|d| count_of_degree(s, d)).sum();
                let mut start = 0;
                'outer: while start < total {
                    let end = (start + CHUNK).min(total);
                    let fs: Vec<Vec<usize>> =
                        (start..end).map(|r| decode_f(s, bounds.deg_f, r)).collect();
                    for (f, outcome) in fs.iter().zip(run_chunk(&fs)) {
                        stats.f_examined += 1;
                        stats.g_leaves += outcome.leaves;
                        if let Some(hit) = outcome.hit {
                            found = Some((f.clone(), hit));
                            break 'outer;
                        }
                    }
                    start = end;
                }
            }
            SearchMode::Sampled { trials } => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                let mut done = 0;
                'sampled: while done < trials {
                    let batch = CHUNK.min(trials - done);
                    let fs: Vec<Vec<usize>> = (0..batch)
                        .map(|_| loop {
                            let mut f: Vec<usize> = (0..=bounds.deg_f)
                                .map(|_| rng.gen_range(0..t.size()))
                                .collect();
                            while f.last() == Some(&0) {
                                f.pop();
                            }
                            if !f.is_empty() {
                                break f;
                            }
                        })
                        .collect();
                    for (f, outcome) in fs.iter().zip(run_chunk(&fs)) {
                        stats.f_examined += 1;
                        stats.g_leaves += outcome.leaves;
                        if let Some(hit) = outcome.hit {
                            found = Some((f.clone(), hit));
                            break 'sampled;
                        }
                    }
                    done += batch;
                }
            }
        }
    }
    stats.elapsed = started.elapsed();

    let (verdict, witness) = match found {
        Some((f, (g, i, j))) => (
            Verdict::Counterexample,
            Some(build_witness(t, target, &f, &g, i, j)),
        ),
        None => match mode {
            SearchMode::Exhaustive => (Verdict::Verified, None),
            SearchMode::Sampled { .. } => (Verdict::Unknown, None),
        },
    };
    Ok(ClassificationReport {
        ring_expr: ring.name().to_string(),
        ring_size: t.size(),
        target: target.kind,
        bounds,
        mode,
        verdict,
        witness,
        stats,
    })
}

fn build_witness(
    t: &TableRing,
    target: &TargetSet,
    f: &[usize],
    g: &[usize],
    i: usize,
    j: usize,
) -> Witness {
    let labels = |xs: &[usize]| xs.iter().map(|&x| t.label(x).to_string()).collect();
    let product = t.mul(f[i], g[j]);
    let power_trace = (target.kind == TargetKind::Nil).then(|| {
        let mut seen = vec![false; t.size()];
        let mut trace = Vec::new();
        let mut p = product;
        loop {
            trace.push(t.label(p).to_string());
            if p == 0 || seen[p] {
                break trace;
            }
            seen[p] = true;
            p = t.mul(p, product);
        }
    });
    Witness {
        f: labels(f),
        g: labels(g),
        offending: (i, j),
        product: t.label(product).to_string(),
        target: target.kind,
        target_size: target.resolved.len(),
        power_trace,
    }
}

/// Replays a witness by direct arithmetic: `f` and `g` are nonzero, `f g = 0`,
/// the stated product is `a_i b_j`, and it lies outside the target. Target
/// membership is recomputed per element, not taken from any precomputed set.
pub fn verify_certificate(ring: &FiniteRing, report: &ClassificationReport) -> Result<bool> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| Error::MalformedWitness("report carries no witness".into()))?;
    let t = ring.require_table()?;
    let resolve = |l: &String| {
        t.index_of(l).ok_or_else(|| {
            Error::MalformedWitness(format!("`{l}` is not an element of {}", ring.name()))
        })
    };
    let f = w.f.iter().map(resolve).collect::<Result<Vec<_>>>()?;
    let g = w.g.iter().map(resolve).collect::<Result<Vec<_>>>()?;
    if f.iter().all(|&a| a == 0) {
        return Err(Error::MalformedWitness("f is the zero polynomial".into()));
    }
    if g.iter().all(|&b| b == 0) {
        return Err(Error::MalformedWitness("g is the zero polynomial".into()));
    }
    let (i, j) = w.offending;
    if i >= f.len() || j >= g.len() {
        return Err(Error::MalformedWitness("offending index out of range".into()));
    }
    let stated = resolve(&w.product)?;
    if convolve(t, &f, &g).iter().any(|&c| c != 0) {
        return Ok(false);
    }
    let product = t.mul(f[i], g[j]);
    if product != stated {
        return Ok(false);
    }
    let inside = match w.target {
        TargetKind::Zero => product == 0,
        TargetKind::Nil => nilpotent_in_table(t, product),
        TargetKind::Jac => in_radical_direct(t, product),
    };
    Ok(!inside)
}
