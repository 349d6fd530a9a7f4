//! Finite discrete valuation distributions and the single-bundle benchmarks.
//!
//! A [`DiscreteDist`] is an item's valuation law: a strictly ascending list of
//! non-negative values, each carrying a positive rational probability, with
//! the probabilities summing to exactly one. A [`ProductInstance`] is an
//! ordered list of independent items.
//!
//! Buyers purchase at indifference, so a posted price `p` sells with
//! probability `Pr[X >= p]` (see [`exceedance`]).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, Rational};

/// Largest support a convolution may produce before it is rejected.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("distribution support is empty")]
    EmptySupport,
    #[error("support and probability lists differ in length ({support} vs {probs})")]
    LengthMismatch { support: usize, probs: usize },
    #[error("negative valuation {0}")]
    NegativeValue(String),
    #[error("support is not strictly ascending at position {0}")]
    NotAscending(usize),
    #[error("probability {0} is not positive")]
    NonPositiveProbability(String),
    #[error("probabilities sum to {0}, not 1")]
    MassNotOne(String),
    #[error("instance has no items")]
    EmptyInstance,
    #[error("bundle is empty")]
    EmptyBundle,
    #[error("item index {index} out of range for {n} items")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("item index {0} appears twice in a bundle")]
    DuplicateIndex(usize),
    #[error("convolution support would exceed {cap} points")]
    SupportExplosion { cap: usize },
    #[error("no probability mass below {0}")]
    NoMassBelow(String),
}

/// One item's valuation distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteDist {
    support: Vec<Rational>,
    probs: Vec<Rational>,
}

impl DiscreteDist {
    /// Builds a distribution from aligned lists, checking every invariant.
    pub fn new(support: Vec<Rational>, probs: Vec<Rational>) -> Result<Self, DistError> {
        if support.len() != probs.len() {
            return Err(DistError::LengthMismatch {
                support: support.len(),
                probs: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(DistError::EmptySupport);
        }
        for (i, v) in support.iter().enumerate() {
            if v.is_negative() {
                return Err(DistError::NegativeValue(format_rational(v)));
            }
            if i > 0 && support[i - 1] >= *v {
                return Err(DistError::NotAscending(i));
            }
        }
        let mut total = Rational::zero();
        for p in &probs {
            if !p.is_positive() {
                return Err(DistError::NonPositiveProbability(format_rational(p)));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(DistError::MassNotOne(format_rational(&total)));
        }
        Ok(Self { support, probs })
    }

    /// Builds a distribution from unordered `(value, prob)` pairs. Repeated
    /// values are merged and zero-probability atoms are dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (v, p) in pairs {
            if p.is_negative() {
                return Err(DistError::NonPositiveProbability(format_rational(&p)));
            }
            *merged.entry(v).or_insert_with(Rational::zero) += p;
        }
        let (support, probs) = merged.into_iter().filter(|(_, p)| !p.is_zero()).unzip();
        Self::new(support, probs)
    }

    pub fn point_mass(value: Rational) -> Self {
        Self::new(vec![value], vec![Rational::one()]).expect("point mass is valid")
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_sorted_unchecked(support: Vec<Rational>, probs: Vec<Rational>) -> Self {
        debug_assert!(Self::new(support.clone(), probs.clone()).is_ok());
        Self { support, probs }
    }

    pub fn support(&self) -> &[Rational] {
        &self.support
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.support.iter().zip(self.probs.iter())
    }

    pub fn min_value(&self) -> &Rational {
        &self.support[0]
    }

    pub fn max_value(&self) -> &Rational {
        self.support.last().expect("support is non-empty")
    }

    /// Probability of exactly `v`.
    pub fn prob_of(&self, v: &Rational) -> Rational {
        match self.support.binary_search(v) {
            Ok(i) => self.probs[i].clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn mean(&self) -> Rational {
        self.iter().map(|(v, p)| v * p).sum()
    }
}

/// Independent items, indexed `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductInstance {
    items: Vec<DiscreteDist>,
}

impl ProductInstance {
    pub fn new(items: Vec<DiscreteDist>) -> Result<Self, DistError> {
        if items.is_empty() {
            return Err(DistError::EmptyInstance);
        }
        Ok(Self { items })
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[DiscreteDist] {
        &self.items
    }

    pub fn item(&self, i: usize) -> &DiscreteDist {
        &self.items[i]
    }

    pub fn into_items(self) -> Vec<DiscreteDist> {
        self.items
    }
}

/// A posted price together with its sale probability and expected revenue.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriceQuote {
    pub price: Rational,
    pub sell_prob: Rational,
    pub revenue: Rational,
}

impl PriceQuote {
    pub fn new(price: Rational, sell_prob: Rational) -> Self {
        let revenue = &price * &sell_prob;
        Self {
            price,
            sell_prob,
            revenue,
        }
    }
}

pub fn convolve(a: &DiscreteDist, b: &DiscreteDist) -> Result<DiscreteDist, DistError> {
    convolve_capped(a, b, DEFAULT_SUPPORT_CAP)
}

/// Distribution of `X + Y` for independent `X ~ a`, `Y ~ b`.
///
/// The longer operand is shifted by every atom of the shorter one; the
/// shifted copies are already sorted, so a k-way merge yields the sorted,
/// deduplicated support directly.
pub fn convolve_capped(
    a: &DiscreteDist,
    b: &DiscreteDist,
    cap: usize,
) -> Result<DiscreteDist, DistError> {
    Ok(Scaled::from_dist(a)
        .convolve(&Scaled::from_dist(b), cap)?
        .into_dist())
}

fn check_bundle(n: usize, bundle: &[usize]) -> Result<(), DistError> {
    if bundle.is_empty() {
        return Err(DistError::EmptyBundle);
    }
    let mut seen = vec![false; n];
    for &i in bundle {
        if i >= n {
            return Err(DistError::IndexOutOfRange { index: i, n });
        }
        if seen[i] {
            return Err(DistError::DuplicateIndex(i));
        }
        seen[i] = true;
    }
    Ok(())
}

pub fn bundle_sum_dist(
    inst: &ProductInstance,
    bundle: &[usize],
) -> Result<DiscreteDist, DistError> {
    bundle_sum_dist_capped(inst, bundle, DEFAULT_SUPPORT_CAP)
}

/// Distribution of `sum_{i in bundle} v_i`.
pub fn bundle_sum_dist_capped(
    inst: &ProductInstance,
    bundle: &[usize],
    cap: usize,
) -> Result<DiscreteDist, DistError> {
    Ok(scaled_bundle_sum(inst, bundle, cap)?.into_dist())
}

/// Optimal posted price for the sum of `bundle`, without materializing the
/// rational sum distribution.
pub fn bundle_quote_capped(
    inst: &ProductInstance,
    bundle: &[usize],
    cap: usize,
) -> Result<PriceQuote, DistError> {
    Ok(scaled_bundle_sum(inst, bundle, cap)?.optimal_price())
}

fn scaled_bundle_sum(
    inst: &ProductInstance,
    bundle: &[usize],
    cap: usize,
) -> Result<Scaled, DistError> {
    check_bundle(inst.n(), bundle)?;
    let mut acc = Scaled::from_dist(inst.item(bundle[0]));
    for &i in &bundle[1..] {
        acc = acc.convolve(&Scaled::from_dist(inst.item(i)), cap)?;
    }
    Ok(acc)
}

/// A law stored as integer numerators over two common denominators: value
/// `k` is `values[k] / vden` with probability `probs[k] / pden`. Sums and
/// products then need no gcd work until the end.
struct Scaled {
    vden: BigInt,
    pden: BigInt,
    values: Vec<BigInt>,
    probs: Vec<BigInt>,
}

impl Scaled {
    fn from_dist(d: &DiscreteDist) -> Self {
        let vden = d
            .support
            .iter()
            .fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        let pden = d.probs.iter().fold(BigInt::one(), |l, p| l.lcm(p.denom()));
        Scaled {
            values: d
                .support
                .iter()
                .map(|v| v.numer() * (&vden / v.denom()))
                .collect(),
            probs: d
                .probs
                .iter()
                .map(|p| p.numer() * (&pden / p.denom()))
                .collect(),
            vden,
            pden,
        }
    }

    fn rescaled_values(&self, vden: &BigInt) -> Vec<BigInt> {
        let f = vden / &self.vden;
        if f.is_one() {
            self.values.clone()
        } else {
            self.values.iter().map(|v| v * &f).collect()
        }
    }

    fn convolve(&self, other: &Scaled, cap: usize) -> Result<Scaled, DistError> {
        let vden = self.vden.lcm(&other.vden);
        let pden = &self.pden * &other.pden;
        let (a, b) = (self.rescaled_values(&vden), other.rescaled_values(&vden));
        let ((lv, lp), (sv, sp)) = if a.len() >= b.len() {
            ((a, &self.probs), (b, &other.probs))
        } else {
            ((b, &other.probs), (a, &self.probs))
        };
        let mut values: Vec<BigInt> = Vec::with_capacity(lv.len() * sv.len());
        let mut probs: Vec<BigInt> = Vec::with_capacity(lv.len() * sv.len());
        let mut cursor = vec![0usize; sv.len()];
        let mut heap: BinaryHeap<Reverse<(BigInt, usize)>> = sv
            .iter()
            .enumerate()
            .map(|(j, s)| Reverse((&lv[0] + s, j)))
            .collect();
        while let Some(Reverse((value, j))) = heap.pop() {
            let i = cursor[j];
            let p = &lp[i] * &sp[j];
            if values.last() == Some(&value) {
                *probs.last_mut().expect("aligned") += p;
            } else {
                if values.len() == cap {
                    return Err(DistError::SupportExplosion { cap });
                }
                values.push(value);
                probs.push(p);
            }
            cursor[j] += 1;
            if cursor[j] < lv.len() {
                heap.push(Reverse((&lv[cursor[j]] + &sv[j], j)));
            }
        }
        Ok(Scaled {
            vden,
            pden,
            values,
            probs,
        })
    }

    fn into_dist(self) -> DiscreteDist {
        let Scaled {
            vden,
            pden,
            values,
            probs,
        } = self;
        DiscreteDist::from_sorted_unchecked(
            values
                .into_iter()
                .map(|v| Rational::new(v, vden.clone()))
                .collect(),
            probs
                .into_iter()
                .map(|p| Rational::new(p, pden.clone()))
                .collect(),
        )
    }

    /// Same contract as [`optimal_price`]; revenues are compared as integers
    /// over the shared denominator `vden * pden`.
    fn optimal_price(&self) -> PriceQuote {
        let mut tail = BigInt::zero();
        let mut best: Option<(usize, BigInt, BigInt)> = None;
        for k in (0..self.values.len()).rev() {
            tail += &self.probs[k];
            let rev = &self.values[k] * &tail;
            if best.as_ref().is_none_or(|(_, r, _)| rev >= *r) {
                best = Some((k, rev, tail.clone()));
            }
        }
        let (k, _, tail) = best.expect("support is non-empty");
        PriceQuote::new(
            Rational::new(self.values[k].clone(), self.vden.clone()),
            Rational::new(tail, self.pden.clone()),
        )
    }
}

/// `Pr[X >= t]`.
pub fn exceedance(d: &DiscreteDist, t: &Rational) -> Rational {
    let start = d.support.partition_point(|v| v < t);
    d.probs[start..].iter().sum()
}

/// Revenue-maximizing posted price for a single bundle whose value is
/// distributed as `d`.
///
/// `p * Pr[X >= p]` only increases between support points, so only support
/// points are candidates. Ties go to the lowest price.
pub fn optimal_price(d: &DiscreteDist) -> PriceQuote {
    let mut tails = vec![Rational::zero(); d.len()];
    let mut acc = Rational::zero();
    for i in (0..d.len()).rev() {
        acc += &d.probs[i];
        tails[i] = acc.clone();
    }
    let mut best = 0;
    let mut best_rev = &d.support[0] * &tails[0];
    for (i, (v, tail)) in d.support.iter().zip(&tails).enumerate().skip(1) {
        let rev = v * tail;
        if rev > best_rev {
            best = i;
            best_rev = rev;
        }
    }
    PriceQuote {
        price: d.support[best].clone(),
        sell_prob: tails.swap_remove(best),
        revenue: best_rev,
    }
}

/// Revenue from pricing every item separately, with the per-item quotes.
pub fn srev(inst: &ProductInstance) -> (Rational, Vec<PriceQuote>) {
    let quotes: Vec<PriceQuote> = inst.items().iter().map(optimal_price).collect();
    let total = quotes.iter().map(|q| &q.revenue).sum();
    (total, quotes)
}

/// Optimal grand-bundle quote.
pub fn brev(inst: &ProductInstance) -> Result<PriceQuote, DistError> {
    brev_capped(inst, DEFAULT_SUPPORT_CAP)
}

pub fn brev_capped(inst: &ProductInstance, cap: usize) -> Result<PriceQuote, DistError> {
    let all: Vec<usize> = (0..inst.n()).collect();
    bundle_quote_capped(inst, &all, cap)
}

/// `E[X | X < t]`.
pub fn conditional_expectation_below(
    d: &DiscreteDist,
    t: &Rational,
) -> Result<Rational, DistError> {
    let end = d.support.partition_point(|v| v < t);
    if end == 0 {
        return Err(DistError::NoMassBelow(format_rational(t)));
    }
    let mass: Rational = d.probs[..end].iter().sum();
    let weighted: Rational = d.support[..end]
        .iter()
        .zip(&d.probs[..end])
        .map(|(v, p)| v * p)
        .sum();
    Ok(weighted / mass)
}
