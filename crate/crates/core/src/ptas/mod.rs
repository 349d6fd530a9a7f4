//! Approximation pipeline for the optimal partition mechanism.
//!
//! For every price scale `pi` on the multiplicative net between the smallest
//! nonzero value and the sum of per-item maxima, each item is simplified
//! (rounded, low values blurred, unlikely high values pruned) and reduced to
//! a [`BucketKey`]. Items sharing a key are interchangeable, so the search
//! only chooses, per bucket, which fraction of its items goes to each of at
//! most `ell_max` bundles (the rest are sold separately). The fractions live
//! on a nested dyadic grid of the simplex.
//!
//! The simplified laws only shape the candidate set. Every candidate is
//! priced and evaluated exactly on the original instance, so the reported
//! revenue is always a true lower bound on the optimum.

mod bucket;
mod net;
mod simplify;
mod structure;

pub use bucket::{bucket_key, bucketize, BucketKey};
pub use net::Net;
pub use simplify::{
    collapse_low_values, low_cutoff, merge_low_values, prune_high_values, round_dist,
    simplify_rounded, window_peak,
};
pub use structure::{
    drop_low_bundles, merge_bundles, merge_chebyshev_tail, merged_sell_prob_bound,
    singletonize_check, RangeFilter, SingletonizeDecision,
};

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dist::{bundle_quote_capped, PriceQuote, ProductInstance, DEFAULT_SUPPORT_CAP};
use crate::exact::{SolveError, SolveReport};
use crate::mechanism::{eval_partition, Bundle, PricedPartition};
use crate::rational::{format_rational, is_in_open_unit, Rational};

/// Default number of generated allocations before the search gives up.
pub const DEFAULT_CANDIDATE_CAP: u64 = 2_000_000;

/// Environment variable overriding the candidate budget.
pub const CANDIDATE_CAP_ENV: &str = "PARTMECH_CANDIDATE_CAP";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PtasError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot merge an empty bundle list")]
    EmptyMerge,
    #[error("merge precondition violated: {0}")]
    MergePrecondition(String),
}

impl From<PtasError> for SolveError {
    fn from(e: PtasError) -> Self {
        SolveError::InvalidConfig(e.to_string())
    }
}

/// Every approximation knob of the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtasConfig {
    /// Net granularity and probability floor for bundles.
    pub eps: Rational,
    /// Target loss.
    pub delta: Rational,
    /// Largest number of non-trivial bundles searched.
    pub ell_max: usize,
    /// Same-scale bundle count that triggers merging.
    pub merge_k: u64,
    /// Bundles priced below `range_eta * max price` are dropped.
    pub range_eta: Rational,
    /// Depth of the dyadic allocation grid (`2^grid_levels` steps).
    pub grid_levels: u32,
    /// Low-value cutoff is `eps^low_threshold_exp * pi`; 1 or 2.
    pub low_threshold_exp: u32,
    /// A bucket class below `zero_ratio` times the largest class is ZERO.
    pub zero_ratio: Rational,
    /// Budget of generated allocations.
    pub candidate_cap: u64,
    /// Support cap for every exact bundle evaluation.
    pub support_cap: usize,
}

/// `ceil(8 / (eps^4 * delta^3))`, saturating at `u64::MAX`.
pub fn default_merge_k(eps: &Rational, delta: &Rational) -> u64 {
    let k = (Rational::from_integer(BigInt::from(8)) / (eps.pow(4) * delta.pow(3))).ceil();
    k.to_integer().to_u64().unwrap_or(u64::MAX)
}

/// `delta^4 * eps^5 * (1 - eps)`.
pub fn default_range_eta(eps: &Rational, delta: &Rational) -> Rational {
    delta.pow(4) * eps.pow(5) * (Rational::one() - eps)
}

/// `k * log_eps(eta)`, the worst-case bundle budget implied by the default
/// constants. Astronomically large for any useful `delta`; informational.
pub fn theoretical_bundle_budget(eps: &Rational, delta: &Rational) -> f64 {
    let k = default_merge_k(eps, delta) as f64;
    let eta = crate::rational::to_f64(&default_range_eta(eps, delta));
    let e = crate::rational::to_f64(eps);
    k * eta.ln() / e.ln()
}

impl PtasConfig {
    pub fn new(eps: Rational, delta: Rational) -> Result<Self, PtasError> {
        for (name, x) in [("eps", &eps), ("delta", &delta)] {
            if !is_in_open_unit(x) {
                return Err(PtasError::InvalidConfig(format!(
                    "{name} = {} must lie in (0, 1)",
                    format_rational(x)
                )));
            }
        }
        let cfg = Self {
            merge_k: default_merge_k(&eps, &delta),
            range_eta: default_range_eta(&eps, &delta),
            zero_ratio: eps.clone(),
            eps,
            delta,
            ell_max: 3,
            grid_levels: 3,
            low_threshold_exp: 2,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            support_cap: DEFAULT_SUPPORT_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PtasError> {
        let bad = |m: &str| Err(PtasError::InvalidConfig(m.to_string()));
        if !is_in_open_unit(&self.eps) {
            return bad(&format!(
                "eps = {} must lie in (0, 1)",
                format_rational(&self.eps)
            ));
        }
        if !is_in_open_unit(&self.delta) {
            return bad(&format!(
                "delta = {} must lie in (0, 1)",
                format_rational(&self.delta)
            ));
        }
        if self.ell_max == 0 {
            return bad("ell_max must be at least 1");
        }
        if self.merge_k == 0 {
            return bad("merge_k must be at least 1");
        }
        if !is_in_open_unit(&self.range_eta) {
            return bad("range_eta must lie in (0, 1)");
        }
        if !(1..=2).contains(&self.low_threshold_exp) {
            return bad("low_threshold_exp must be 1 or 2");
        }
        if self.grid_levels > 12 {
            return bad("grid_levels above 12 is not supported");
        }
        if self.zero_ratio < Rational::zero() || self.zero_ratio > Rational::one() {
            return bad("zero_ratio must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn net(&self) -> Net {
        Net::new(self.eps.clone())
    }

    /// Applies the candidate-budget override from the environment, if set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(cap) = std::env::var(CANDIDATE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
        {
            self.candidate_cap = cap;
        }
        self
    }
}

/// Compositions of `total` into `parts` non-negative parts, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Distinct per-bundle item counts realizable by a bucket of `size` items
/// from the dyadic grid: `count_j = floor(frac_j * size)`, leftovers sold
/// separately. Order follows the first grid point producing each vector.
fn bucket_allocations(
    size: usize,
    ell: usize,
    grid: &[Vec<usize>],
    steps: usize,
) -> Vec<Vec<usize>> {
    let mut seen = IndexSet::new();
    for point in grid {
        let counts: Vec<usize> = point[..ell].iter().map(|c| c * size / steps).collect();
        seen.insert(counts);
    }
    seen.into_iter().collect()
}

/// Sorts items within bundles and bundles by smallest item.
fn canonical(mut blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

struct CandidatePool {
    set: IndexSet<Vec<Vec<usize>>>,
    generated: u64,
    cap: u64,
    truncated: bool,
}

impl CandidatePool {
    fn offer(&mut self, blocks: Vec<Vec<usize>>) -> bool {
        if self.generated >= self.cap {
            self.truncated = true;
            return false;
        }
        self.generated += 1;
        self.set.insert(canonical(blocks));
        true
    }
}

/// Enumerates the allocations of `groups` (buckets, items ascending) into
/// `ell` bundles plus separate sale.
fn enumerate_allocations(
    groups: &[Vec<usize>],
    ell: usize,
    grid: &[Vec<usize>],
    steps: usize,
    pool: &mut CandidatePool,
) {
    let options: Vec<Vec<Vec<usize>>> = groups
        .iter()
        .map(|g| bucket_allocations(g.len(), ell, grid, steps))
        .collect();
    let mut digits = vec![0usize; groups.len()];
    loop {
        let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); ell];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (g, (group, &d)) in groups.iter().zip(&digits).enumerate() {
            let counts = &options[g][d];
            let mut it = group.iter().copied();
            for (b, &c) in counts.iter().enumerate() {
                bundles[b].extend(it.by_ref().take(c));
            }
            blocks.extend(it.map(|i| vec![i]));
        }
        blocks.extend(bundles.into_iter().filter(|b| !b.is_empty()));
        if !pool.offer(blocks) {
            return;
        }

        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Variants of a priced candidate suggested by the structural reductions:
/// dissolve bundles that rarely sell, and dissolve bundles priced below
/// `range_eta` times the most expensive bundle.
fn structural_variants(
    inst: &ProductInstance,
    blocks: &[Vec<usize>],
    quotes: &HashMap<Vec<usize>, Option<PriceQuote>>,
    cfg: &PtasConfig,
) -> Vec<Vec<Vec<usize>>> {
    let nontrivial: Vec<(&Vec<usize>, &PriceQuote)> = blocks
        .iter()
        .filter(|b| b.len() > 1)
        .filter_map(|b| quotes.get(b).and_then(|q| q.as_ref()).map(|q| (b, q)))
        .collect();
    if nontrivial.is_empty() {
        return Vec::new();
    }
    let dissolve = |drop: &dyn Fn(usize) -> bool| -> Option<Vec<Vec<usize>>> {
        let mut changed = false;
        let mut out = Vec::new();
        for b in blocks {
            let idx = nontrivial.iter().position(|(nb, _)| *nb == b);
            match idx {
                Some(k) if drop(k) => {
                    changed = true;
                    out.extend(b.iter().map(|&i| vec![i]));
                }
                _ => out.push(b.clone()),
            }
        }
        changed.then(|| canonical(out))
    };

    let mut variants = Vec::new();
    let rare = |k: usize| singletonize_check(inst, nontrivial[k].0, nontrivial[k].1, cfg).dissolve;
    variants.extend(dissolve(&rare));
    let qs: Vec<PriceQuote> = nontrivial.iter().map(|(_, q)| (*q).clone()).collect();
    let filter = drop_low_bundles(&qs, cfg);
    let low = |k: usize| filter.dropped.contains(&k);
    variants.extend(dissolve(&low));
    variants
}

/// Approximate optimal partition mechanism.
///
/// The all-singletons and grand-bundle partitions are always candidates,
/// so the result is never worse than the better of `srev` and `brev`.
pub fn solve_ptas(inst: &ProductInstance, cfg: &PtasConfig) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let start = Instant::now();
    let n = inst.n();
    let net = cfg.net();

    let mut pool = CandidatePool {
        set: IndexSet::new(),
        generated: 0,
        cap: cfg.candidate_cap.max(2),
        truncated: false,
    };
    pool.offer((0..n).map(|i| vec![i]).collect());
    pool.offer(vec![(0..n).collect()]);

    let v_min = inst
        .items()
        .iter()
        .flat_map(|d| d.support().iter())
        .filter(|v| !v.is_zero())
        .min()
        .cloned();
    let v_max: Rational = inst.items().iter().map(|d| d.max_value().clone()).sum();

    if let Some(v_min) = v_min {
        let rounded: Vec<_> = inst.items().iter().map(|d| round_dist(d, &net)).collect();
        let steps = 1usize << cfg.grid_levels;
        let grids: Vec<Vec<Vec<usize>>> = (1..=cfg.ell_max)
            .map(|ell| compositions(steps, ell + 1))
            .collect();
        let mut seen_groupings: HashSet<Vec<Vec<usize>>> = HashSet::new();

        'scales: for j in net.indices_between(&v_min, &v_max) {
            let pi = net.point(j);
            let simplified = ProductInstance::new(
                rounded
                    .iter()
                    .map(|d| simplify_rounded(d, &pi, cfg))
                    .collect(),
            )
            .expect("non-empty");
            let mut groups: Vec<Vec<usize>> =
                bucketize(&simplified, &pi, cfg).into_values().collect();
            groups.sort();
            if !seen_groupings.insert(groups.clone()) {
                continue;
            }
            for (ell, grid) in (1..=cfg.ell_max).zip(&grids) {
                enumerate_allocations(&groups, ell, grid, steps, &mut pool);
                if pool.truncated {
                    break 'scales;
                }
            }
        }
    }

    // Exact quotes on the original instance, one per distinct bundle.
    let mut bundles: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut bundle_set: HashSet<Vec<usize>> = bundles.iter().cloned().collect();
    for cand in &pool.set {
        for b in cand {
            if bundle_set.insert(b.clone()) {
                bundles.push(b.clone());
            }
        }
    }
    let quotes: HashMap<Vec<usize>, Option<PriceQuote>> = bundles
        .par_iter()
        .map(|b| {
            let q = bundle_quote_capped(inst, b, cfg.support_cap).ok();
            (b.clone(), q)
        })
        .collect();

    let base: Vec<Vec<Vec<usize>>> = pool.set.iter().cloned().collect();
    for cand in &base {
        for v in structural_variants(inst, cand, &quotes, cfg) {
            pool.set.insert(v);
        }
    }

    let candidates: Vec<&Vec<Vec<usize>>> = pool.set.iter().collect();
    let revenues: Vec<Option<Rational>> = candidates
        .par_iter()
        .map(|cand| {
            cand.iter()
                .map(|b| {
                    quotes
                        .get(b)
                        .and_then(|q| q.as_ref())
                        .map(|q| q.revenue.clone())
                })
                .sum::<Option<Rational>>()
        })
        .collect();
    let skipped = revenues.iter().filter(|r| r.is_none()).count() as u64;
    let mut best: Option<(usize, &Rational)> = None;
    for (idx, r) in revenues.iter().enumerate() {
        if let Some(r) = r {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((idx, r));
            }
        }
    }
    let (best_idx, _) = best.ok_or_else(|| {
        SolveError::InvalidConfig("every candidate exceeded the support cap".to_string())
    })?;
    let pp = PricedPartition::new(
        candidates[best_idx]
            .iter()
            .map(|b| Bundle {
                items: b.clone(),
                price: quotes[b].as_ref().expect("evaluated").price.clone(),
            })
            .collect(),
    );
    // Certificate: re-evaluate on the original instance.
    let revenue = eval_partition(inst, &pp)?;
    Ok(SolveReport {
        best: pp,
        revenue,
        partitions_examined: candidates.len() as u64,
        candidates_skipped: skipped,
        truncated: pool.truncated,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{brev, srev, DiscreteDist};
    use crate::exact::{solve_exact, DEFAULT_MAX_N};
    use crate::rational::{int, ratio};

    fn dist(pairs: &[(i64, i64, i64)]) -> DiscreteDist {
        DiscreteDist::from_pairs(pairs.iter().map(|&(v, n, d)| (int(v), ratio(n, d)))).unwrap()
    }

    fn two_bundles() -> ProductInstance {
        let half = dist(&[(1, 1, 2), (2, 1, 2)]);
        let rare = dist(&[(1, 9, 10), (10, 1, 10)]);
        ProductInstance::new(vec![half.clone(), half, rare.clone(), rare]).unwrap()
    }

    #[test]
    fn default_constants() {
        let c = PtasConfig::new(ratio(1, 2), ratio(1, 2)).unwrap();
        assert_eq!(c.merge_k, 1024);
        assert_eq!(c.range_eta, ratio(1, 16) * ratio(1, 32) * ratio(1, 2));
        assert!(theoretical_bundle_budget(&c.eps, &c.delta) > 1e4);
    }

    #[test]
    fn config_validation() {
        assert!(PtasConfig::new(int(1), ratio(1, 2)).is_err());
        assert!(PtasConfig::new(ratio(1, 2), int(0)).is_err());
        let mut c = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        c.low_threshold_exp = 3;
        assert!(c.validate().is_err());
        c.low_threshold_exp = 1;
        c.ell_max = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn compositions_count() {
        // C(8 + 3, 3)
        assert_eq!(compositions(8, 4).len(), 165);
        assert!(compositions(4, 2).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn allocations_never_overallocate() {
        let grid = compositions(8, 3);
        for size in 0..12 {
            for counts in bucket_allocations(size, 2, &grid, 8) {
                assert!(counts.iter().sum::<usize>() <= size);
            }
        }
        assert_eq!(
            bucket_allocations(1, 2, &grid, 8),
            vec![vec![0, 0], vec![0, 1], vec![1, 0]]
        );
    }

    #[test]
    fn point_masses() {
        let inst = ProductInstance::new(
            [3, 1, 4]
                .iter()
                .map(|&v| DiscreteDist::point_mass(int(v)))
                .collect(),
        )
        .unwrap();
        let cfg = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        assert_eq!(solve_ptas(&inst, &cfg).unwrap().revenue, int(8));
    }

    #[test]
    fn all_zero_instance() {
        let inst = ProductInstance::new(vec![DiscreteDist::point_mass(int(0)); 3]).unwrap();
        let cfg = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        assert_eq!(solve_ptas(&inst, &cfg).unwrap().revenue, int(0));
    }

    #[test]
    fn hart_nisan_matches_oracle() {
        let u = dist(&[(0, 1, 3), (1, 1, 3), (2, 1, 3)]);
        let inst = ProductInstance::new(vec![u.clone(), u]).unwrap();
        let cfg = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        assert_eq!(solve_ptas(&inst, &cfg).unwrap().revenue, ratio(4, 3));
    }

    #[test]
    fn two_bundles_matches_oracle() {
        let inst = two_bundles();
        let mut cfg = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        cfg.ell_max = 2;
        cfg.grid_levels = 3;
        let report = solve_ptas(&inst, &cfg).unwrap();
        let oracle = solve_exact(&inst, DEFAULT_MAX_N).unwrap();
        assert_eq!(report.revenue, oracle.revenue);
        assert_eq!(report.revenue, ratio(217, 50));
        assert_eq!(eval_partition(&inst, &report.best).unwrap(), report.revenue);
    }

    #[test]
    fn floor_dominance_and_truncation() {
        let inst = two_bundles();
        let mut cfg = PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap();
        cfg.candidate_cap = 2;
        let report = solve_ptas(&inst, &cfg).unwrap();
        assert!(report.truncated);
        let floor = srev(&inst).0.max(brev(&inst).unwrap().revenue);
        assert!(report.revenue >= floor);
    }
}
