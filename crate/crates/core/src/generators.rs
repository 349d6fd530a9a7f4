//! Instance families: the worked examples, the 3D-matching gadget with its
//! structural verifier, and seeded random instances.

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{DiscreteDist, ProductInstance};
use crate::mechanism::{eval_partition, MechanismError, PricedPartition};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {0} belongs to no hyperedge")]
    IsolatedVertex(String),
    #[error("hyperedge list is empty")]
    NoHyperedges,
}

/// A generator family and its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    TwoBundles,
    HartNisan,
    TwoGap {
        n: u64,
    },
    ThreeDm {
        edges: Vec<(usize, usize, usize)>,
    },
    Random {
        n: usize,
        max_support_size: usize,
        value_bound: u64,
        seed: u64,
    },
}

impl GenSpec {
    pub fn generate(&self) -> Result<(ProductInstance, Option<GadgetMeta>), GenError> {
        Ok(match self {
            GenSpec::TwoBundles => (gen_two_bundles(), None),
            GenSpec::HartNisan => (gen_hart_nisan(), None),
            GenSpec::TwoGap { n } => (gen_two_gap(*n)?, None),
            GenSpec::ThreeDm { edges } => {
                let (inst, meta) = gen_3dm(edges)?;
                (inst, Some(meta))
            }
            GenSpec::Random {
                n,
                max_support_size,
                value_bound,
                seed,
            } => (
                gen_random(*n, *max_support_size, *value_bound, *seed)?,
                None,
            ),
        })
    }
}

fn law(pairs: Vec<(Rational, Rational)>) -> DiscreteDist {
    DiscreteDist::from_pairs(pairs).expect("generator laws are valid")
}

/// Two items uniform on `{1, 2}` and two items with `Pr[10] = 1/10`,
/// `Pr[1] = 9/10`. The optimal partition sells `{0,1}` at 3 and `{2,3}` at 11.
pub fn gen_two_bundles() -> ProductInstance {
    let half = law(vec![(int(1), ratio(1, 2)), (int(2), ratio(1, 2))]);
    let rare = law(vec![(int(1), ratio(9, 10)), (int(10), ratio(1, 10))]);
    ProductInstance::new(vec![half.clone(), half, rare.clone(), rare]).expect("four items")
}

/// Two i.i.d. items uniform on `{0, 1, 2}`.
pub fn gen_hart_nisan() -> ProductInstance {
    let u = law((0..3).map(|v| (int(v), ratio(1, 3))).collect());
    ProductInstance::new(vec![u.clone(), u]).expect("two items")
}

/// Equal-revenue law on `{1..=s}`: `Pr[v >= k] = 1/k`.
pub fn equal_revenue(s: u64) -> DiscreteDist {
    assert!(s >= 1);
    let s = s as i64;
    let mut pairs: Vec<(Rational, Rational)> = (1..s)
        .map(|k| (int(k), ratio(1, k) - ratio(1, k + 1)))
        .collect();
    pairs.push((int(s), ratio(1, s)));
    law(pairs)
}

/// `sum_{k=1..s} 1/k`, the mean of [`equal_revenue`]`(s)`.
pub fn harmonic(s: u64) -> Rational {
    (1..=s as i64).map(|k| ratio(1, k)).sum()
}

/// `2n` items: `n` equal-revenue items on `{1..sqrt(n)}` followed by `n`
/// rare-event items, item `b` (1-based) worth `alpha * n^b` with
/// probability `n^-b` and 0 otherwise, where `alpha = H(sqrt(n))`.
///
/// The separation over `max(srev, brev)` is asymptotic; small `n` only
/// shows a modest ratio.
pub fn gen_two_gap(n: u64) -> Result<ProductInstance, GenError> {
    if n == 0 {
        return Err(GenError::InvalidParameter("n must be positive".into()));
    }
    let s = n.sqrt();
    if s * s != n {
        return Err(GenError::InvalidParameter(format!(
            "n = {n} is not a perfect square"
        )));
    }
    if n > 4096 {
        return Err(GenError::InvalidParameter(format!("n = {n} is too large")));
    }
    let alpha = harmonic(s);
    let mut items = vec![equal_revenue(s); n as usize];
    let nb = BigInt::from(n);
    for b in 1..=n as usize {
        let scale = Rational::from_integer(num_traits::pow(nb.clone(), b));
        let p = scale.recip();
        items.push(law(vec![
            (Rational::zero(), Rational::one() - &p),
            (&alpha * &scale, p),
        ]));
    }
    Ok(ProductInstance::new(items).expect("non-empty"))
}

/// The constructive mechanism behind the two-gap separation: bundle all
/// equal-revenue items, sell every rare item separately.
pub fn two_gap_reference_partition(n: u64) -> Vec<Vec<usize>> {
    let n = n as usize;
    let mut blocks = vec![(0..n).collect::<Vec<_>>()];
    blocks.extend((n..2 * n).map(|i| vec![i]));
    blocks
}

/// Sidecar for a 3D-matching gadget instance.
///
/// Items are the vertices: `X` occupies `0..x`, `Y` occupies `x..x+y`, and
/// `Z` occupies `x+y..x+y+z`. Hyperedge `h` (0-based position in `edges`)
/// carries the price `|H|^6 + |H|^3 * (h+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetMeta {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub edges: Vec<(usize, usize, usize)>,
    pub pi: Vec<BigInt>,
    pub pi_min: BigInt,
    pub pi_max: BigInt,
}

impl GadgetMeta {
    pub fn n_items(&self) -> usize {
        self.x + self.y + self.z
    }

    /// Item indices of hyperedge `h`, ascending.
    pub fn edge_items(&self, h: usize) -> [usize; 3] {
        let (a, b, c) = self.edges[h];
        [a, self.x + b, self.x + self.y + c]
    }

    pub fn pi_rational(&self, h: usize) -> Rational {
        Rational::from_integer(self.pi[h].clone())
    }
}

/// `|H|^6 + |H|^3 * h` for 1-based `h`.
pub fn gadget_price(num_edges: usize, h: usize) -> BigInt {
    let m = BigInt::from(num_edges);
    num_traits::pow(m.clone(), 6) + num_traits::pow(m, 3) * BigInt::from(h)
}

/// Builds the hardness gadget: one item per vertex with support
/// `{1} ∪ {pi_h : h ∋ i}` and `Pr[v >= pi_h] = 1/pi_h`.
pub fn gen_3dm(edges: &[(usize, usize, usize)]) -> Result<(ProductInstance, GadgetMeta), GenError> {
    if edges.is_empty() {
        return Err(GenError::NoHyperedges);
    }
    let x = edges.iter().map(|e| e.0).max().expect("non-empty") + 1;
    let y = edges.iter().map(|e| e.1).max().expect("non-empty") + 1;
    let z = edges.iter().map(|e| e.2).max().expect("non-empty") + 1;
    let m = edges.len();
    let pi: Vec<BigInt> = (1..=m).map(|h| gadget_price(m, h)).collect();
    let meta = GadgetMeta {
        x,
        y,
        z,
        edges: edges.to_vec(),
        pi_min: gadget_price(m, 0),
        pi_max: gadget_price(m, 0) + num_traits::pow(BigInt::from(m), 4),
        pi: pi.clone(),
    };

    let mut prices: Vec<Vec<BigInt>> = vec![Vec::new(); meta.n_items()];
    for (h, p) in pi.iter().enumerate() {
        for i in meta.edge_items(h) {
            prices[i].push(p.clone());
        }
    }
    let mut items = Vec::with_capacity(meta.n_items());
    for (i, ps) in prices.iter_mut().enumerate() {
        if ps.is_empty() {
            let name = if i < x {
                format!("x{i}")
            } else if i < x + y {
                format!("y{}", i - x)
            } else {
                format!("z{}", i - x - y)
            };
            return Err(GenError::IsolatedVertex(name));
        }
        ps.sort();
        let tail = |k: usize| Rational::from_integer(ps[k].clone()).recip();
        let mut pairs = vec![(Rational::one(), Rational::one() - tail(0))];
        for k in 0..ps.len() {
            let next = if k + 1 < ps.len() {
                tail(k + 1)
            } else {
                Rational::zero()
            };
            pairs.push((Rational::from_integer(ps[k].clone()), tail(k) - next));
        }
        items.push(law(pairs));
    }
    Ok((ProductInstance::new(items).expect("non-empty"), meta))
}

/// Revenue targets for a matching of the gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetOpt {
    /// `|M| * (3 + 3 / pi_max)`, the closed-form approximation.
    pub approx: Rational,
    /// `sum_{h in M} (pi_h + 2) (3/pi_h - 3/pi_h^2 + 1/pi_h^3)`.
    pub exact: Rational,
}

/// `(pi + 2) * (3/pi - 3/pi^2 + 1/pi^3)`: a full hyperedge bundle at `pi + 2`.
pub fn hyperedge_bundle_formula(pi: &Rational) -> Rational {
    let q = pi.recip();
    (pi + int(2)) * (int(3) * &q - int(3) * &q * &q + &q * &q * &q)
}

/// `2 + 1/pi`: the stated revenue of a two-item hyperedge bundle at `pi + 1`.
pub fn two_item_bundle_formula(pi: &Rational) -> Rational {
    int(2) + pi.recip()
}

/// `(pi + 1) * (1 - (1 - 1/pi)^2) = 2 + 1/pi - 1/pi^2`: the revenue of a
/// two-item bundle at `pi + 1` when each item exceeds `pi` w.p. `1/pi`.
pub fn two_item_bundle_exact(pi: &Rational) -> Rational {
    let q = pi.recip();
    let miss = Rational::one() - &q;
    (pi + int(1)) * (Rational::one() - &miss * &miss)
}

/// `matching` lists 0-based hyperedge positions.
pub fn gadget_opt_formula(meta: &GadgetMeta, matching: &[usize]) -> GadgetOpt {
    let pi_max = Rational::from_integer(meta.pi_max.clone());
    let approx = int(matching.len() as i64) * (int(3) + int(3) / pi_max);
    let exact = matching
        .iter()
        .map(|&h| hyperedge_bundle_formula(&meta.pi_rational(h)))
        .sum();
    GadgetOpt { approx, exact }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleCheck {
    pub items: Vec<usize>,
    pub price: Rational,
    pub revenue: Rational,
    /// First hyperedge containing every item of the bundle.
    pub inside_hyperedge: Option<usize>,
    /// The bundle is exactly a hyperedge.
    pub is_hyperedge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetReport {
    pub bundles: Vec<BundleCheck>,
    /// Every bundle lies inside some hyperedge.
    pub all_inside_hyperedges: bool,
    /// Every non-trivial bundle is a full hyperedge (so they form a matching).
    pub is_matching: bool,
    pub matching: Vec<usize>,
    pub revenue: Rational,
    pub opt: GadgetOpt,
}

pub fn verify_gadget_solution(
    meta: &GadgetMeta,
    inst: &ProductInstance,
    pp: &PricedPartition,
) -> Result<GadgetReport, MechanismError> {
    let revenue = eval_partition(inst, pp)?;
    let edge_sets: Vec<[usize; 3]> = (0..meta.edges.len()).map(|h| meta.edge_items(h)).collect();
    let mut bundles = Vec::new();
    let mut matching = Vec::new();
    let mut is_matching = true;
    for b in pp.bundles() {
        let inside = edge_sets
            .iter()
            .position(|e| b.items.iter().all(|i| e.contains(i)));
        let exact_edge = edge_sets
            .iter()
            .position(|e| b.items.as_slice() == e.as_slice());
        if b.items.len() > 1 {
            match exact_edge {
                Some(h) => matching.push(h),
                None => is_matching = false,
            }
        }
        bundles.push(BundleCheck {
            items: b.items.clone(),
            price: b.price.clone(),
            revenue: crate::mechanism::bundle_revenue(inst, &b.items, &b.price)?,
            inside_hyperedge: inside,
            is_hyperedge: exact_edge.is_some(),
        });
    }
    matching.sort_unstable();
    let opt = gadget_opt_formula(meta, &matching);
    Ok(GadgetReport {
        all_inside_hyperedges: bundles.iter().all(|b| b.inside_hyperedge.is_some()),
        is_matching,
        matching,
        revenue,
        opt,
        bundles,
    })
}

/// Seeded random instance: each item draws a support size in
/// `1..=max_support_size`, distinct integer values in `0..=value_bound`, and
/// integer weights in `1..=9` normalized to probabilities.
pub fn gen_random(
    n: usize,
    max_support_size: usize,
    value_bound: u64,
    seed: u64,
) -> Result<ProductInstance, GenError> {
    if n == 0 || max_support_size == 0 || value_bound == 0 {
        return Err(GenError::InvalidParameter(
            "n, max_support_size and value_bound must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = usize::try_from(value_bound.saturating_add(1)).unwrap_or(usize::MAX);
    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let size = rng.random_range(1..=max_support_size.min(span));
        let mut values: Vec<u64> = sample(&mut rng, span, size)
            .into_iter()
            .map(|v| v as u64)
            .collect();
        values.sort_unstable();
        let weights: Vec<i64> = (0..size).map(|_| rng.random_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        items.push(law(values
            .into_iter()
            .zip(weights)
            .map(|(v, w)| (Rational::from_integer(BigInt::from(v)), ratio(w, total)))
            .collect()));
    }
    Ok(ProductInstance::new(items).expect("n >= 1"))
}
