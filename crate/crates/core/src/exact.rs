//! Brute-force oracle for the optimal partition mechanism.
//!
//! Every set partition of the items is visited in restricted-growth-string
//! (RGS) order. Bundle revenues are precomputed once per item subset, so the
//! per-partition work is a sum over its blocks.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::dist::{convolve, optimal_price, DistError, PriceQuote, ProductInstance};
use crate::mechanism::{Bundle, MechanismError, PricedPartition};
use crate::rational::{to_f64, Rational};

/// Default bound on the number of items the oracle accepts.
pub const DEFAULT_MAX_N: usize = 12;

/// Absolute ceiling for the oracle regardless of the caller's bound.
pub const HARD_MAX_N: usize = 20;

/// Prefix length used to split the enumeration into independent chunks.
const CHUNK_PREFIX: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("instance has {n} items; the exact oracle is limited to {max_n}")]
    OracleSizeExceeded { n: usize, max_n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub best: PricedPartition,
    /// Exact revenue of `best` on the instance that was passed in.
    pub revenue: Rational,
    /// Partitions (exact) or distinct candidate partitions (PTAS) evaluated.
    pub partitions_examined: u64,
    /// Candidates dropped because a bundle tripped the support cap.
    pub candidates_skipped: u64,
    /// The candidate budget ran out before enumeration finished.
    pub truncated: bool,
    pub elapsed: Duration,
}

/// Bell numbers, exact up to `n = 25`.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty"));
        for x in &row {
            let v = next.last().expect("non-empty") + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// Iterator over all set partitions of `0..n` in RGS order.
///
/// A partition is encoded by `rgs[i]` = block label of item `i`, where labels
/// appear in first-occurrence order (`rgs[0] = 0`, `rgs[i] <= 1 + max(rgs[..i])`).
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    maxes: Vec<usize>,
    fixed: usize,
    started: bool,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        Self::with_prefix(n, &[])
    }

    /// Enumerates only the partitions whose RGS starts with `prefix`, which
    /// must itself be a valid RGS.
    pub fn with_prefix(n: usize, prefix: &[usize]) -> Self {
        assert!(prefix.len() <= n);
        let mut rgs = prefix.to_vec();
        rgs.resize(n, 0);
        let mut maxes = Vec::with_capacity(n);
        let mut m = 0;
        for &x in &rgs {
            m = m.max(x);
            maxes.push(m);
        }
        Self {
            rgs,
            maxes,
            fixed: prefix.len().max(1),
            started: false,
            done: false,
        }
    }

    /// Advances to the next RGS; returns `None` when exhausted.
    pub fn next_rgs(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.rgs);
        }
        let n = self.rgs.len();
        for i in (self.fixed..n).rev() {
            let prev_max = self.maxes[i - 1];
            if self.rgs[i] <= prev_max {
                self.rgs[i] += 1;
                self.maxes[i] = prev_max.max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return Some(&self.rgs);
            }
        }
        self.done = true;
        None
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_rgs().map(rgs_to_blocks)
    }
}

pub fn enumerate_partitions(n: usize) -> SetPartitions {
    SetPartitions::new(n)
}

pub fn rgs_to_blocks(rgs: &[usize]) -> Vec<Vec<usize>> {
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); k];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].push(i);
    }
    blocks
}

/// Optimal quote for every non-empty item subset, indexed by bitmask.
///
/// Built in layers of increasing subset size; each subset's sum distribution
/// extends the one without its lowest item.
fn subset_quotes(inst: &ProductInstance) -> Result<Vec<Option<PriceQuote>>, DistError> {
    let n = inst.n();
    let size = 1usize << n;
    let mut quotes: Vec<Option<PriceQuote>> = vec![None; size];
    let mut layer: Vec<(usize, crate::dist::DiscreteDist)> = (0..n)
        .map(|i| (1usize << i, inst.item(i).clone()))
        .collect();
    for k in 1..=n {
        for (mask, d) in &layer {
            quotes[*mask] = Some(optimal_price(d));
        }
        if k == n {
            break;
        }
        let prev: std::collections::HashMap<usize, &crate::dist::DiscreteDist> =
            layer.iter().map(|(m, d)| (*m, d)).collect();
        let masks: Vec<usize> = (1..size)
            .filter(|m| m.count_ones() as usize == k + 1)
            .collect();
        let next: Result<Vec<_>, DistError> = masks
            .par_iter()
            .map(|&mask| {
                let low = mask.trailing_zeros() as usize;
                let rest = mask & (mask - 1);
                convolve(prev[&rest], inst.item(low)).map(|d| (mask, d))
            })
            .collect();
        layer = next?;
    }
    Ok(quotes)
}

struct ChunkBest {
    best: Option<(Rational, Vec<usize>)>,
    count: u64,
}

fn scan_chunk(n: usize, prefix: &[usize], exact: &[Rational], approx: &[f64]) -> ChunkBest {
    let mut walker = SetPartitions::with_prefix(n, prefix);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut best_f = f64::NEG_INFINITY;
    let mut count = 0u64;
    let mut masks = vec![0usize; n];
    while let Some(rgs) = walker.next_rgs() {
        count += 1;
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        masks[..k].iter_mut().for_each(|m| *m = 0);
        for (i, &b) in rgs.iter().enumerate() {
            masks[b] |= 1 << i;
        }
        let f: f64 = masks[..k].iter().map(|&m| approx[m]).sum();
        // Float screen; anything that could tie or win is compared exactly.
        let tol = 1e-9 * best_f.abs().max(1.0);
        if f + tol < best_f {
            continue;
        }
        let r: Rational = masks[..k].iter().map(|&m| &exact[m]).sum();
        let better = match &best {
            None => true,
            Some((b, _)) => r > *b,
        };
        if better {
            best_f = to_f64(&r);
            best = Some((r, rgs.to_vec()));
        }
    }
    ChunkBest { best, count }
}

/// Optimal partition mechanism by complete enumeration.
///
/// Ties between partitions go to the first maximizer in RGS order.
pub fn solve_exact(inst: &ProductInstance, max_n: usize) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let n = inst.n();
    let limit = max_n.min(HARD_MAX_N);
    if n > limit {
        return Err(SolveError::OracleSizeExceeded { n, max_n: limit });
    }
    let quotes = subset_quotes(inst)?;
    let exact: Vec<Rational> = quotes
        .iter()
        .map(|q| {
            q.as_ref()
                .map_or_else(num_traits::Zero::zero, |q| q.revenue.clone())
        })
        .collect();
    let approx: Vec<f64> = exact.iter().map(to_f64).collect();

    let p = n.min(CHUNK_PREFIX);
    let prefixes: Vec<Vec<usize>> = {
        let mut it = SetPartitions::new(p);
        let mut out = Vec::new();
        while let Some(r) = it.next_rgs() {
            out.push(r.to_vec());
        }
        out
    };
    let chunks: Vec<ChunkBest> = prefixes
        .par_iter()
        .map(|prefix| scan_chunk(n, prefix, &exact, &approx))
        .collect();

    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut count = 0u64;
    for chunk in chunks {
        count += chunk.count;
        if let Some((r, rgs)) = chunk.best {
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, rgs));
            }
        }
    }
    let (revenue, rgs) = best.expect("at least one partition");
    let bundles = rgs_to_blocks(&rgs)
        .into_iter()
        .map(|items| {
            let mask: usize = items.iter().map(|&i| 1usize << i).sum();
            let price = quotes[mask].as_ref().expect("computed").price.clone();
            Bundle { items, price }
        })
        .collect();
    Ok(SolveReport {
        best: PricedPartition::new(bundles),
        revenue,
        partitions_examined: count,
        candidates_skipped: 0,
        truncated: false,
        elapsed: start.elapsed(),
    })
}
