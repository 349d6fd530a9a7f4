//! Shared corpora and independent checkers for the integration suites.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partmech::dist::bundle_sum_dist;
use partmech::generators::gen_random;
use partmech::ptas::{merge_low_values, round_dist, PtasConfig};
use partmech::{DiscreteDist, ProductInstance, Rational};

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_partmech")
}

pub fn run_cli(args: &[&str], dir: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// Seeded corpus: `n` cycles through `1..=8`, supports up to 4 atoms.
pub fn lemma_corpus(count: u64) -> Vec<ProductInstance> {
    (0..count)
        .map(|seed| gen_random(1 + (seed % 8) as usize, 4, 20, seed).expect("valid parameters"))
        .collect()
}

/// Sum law of all items.
pub fn sum_law(items: &[DiscreteDist]) -> DiscreteDist {
    let inst = ProductInstance::new(items.to_vec()).expect("non-empty");
    let all: Vec<usize> = (0..inst.n()).collect();
    partmech::dist::bundle_sum_dist_capped(&inst, &all, 10_000_000).expect("small corpus")
}

/// Suffix sums of a law, for repeated `Pr[X >= t]` queries.
pub struct Tails {
    support: Vec<Rational>,
    tails: Vec<Rational>,
}

impl Tails {
    pub fn new(d: &DiscreteDist) -> Self {
        let mut tails = vec![Rational::zero(); d.len() + 1];
        for i in (0..d.len()).rev() {
            tails[i] = &tails[i + 1] + &d.probs()[i];
        }
        Tails {
            support: d.support().to_vec(),
            tails,
        }
    }

    pub fn at_least(&self, t: &Rational) -> &Rational {
        &self.tails[self.support.partition_point(|v| v < t)]
    }
}

/// Largest `k / 1000` whose cube is at most `8 * eps`; a rational stand-in
/// for `2 * eps^(1/3)` from below.
pub fn delta_below(eps: &Rational) -> Rational {
    let target = int(8) * eps;
    let mut k = 0i64;
    while ratio(k + 1, 1000).pow(3) <= target {
        k += 1;
    }
    ratio(k, 1000)
}

/// Violations of `Pr_{D1}[S >= (1-d) pi] >= (1-d) Pr_D[S >= pi]` over every
/// support point `pi` of the original sum.
pub fn rounding_violations(
    inst: &ProductInstance,
    eps: &Rational,
    delta: &Rational,
) -> Vec<Rational> {
    let net = partmech::ptas::Net::new(eps.clone());
    let rounded: Vec<DiscreteDist> = inst.items().iter().map(|d| round_dist(d, &net)).collect();
    let original = sum_law(inst.items());
    let (orig, rsum) = (Tails::new(&original), Tails::new(&sum_law(&rounded)));
    let keep = Rational::one() - delta;
    original
        .support()
        .iter()
        .filter(|pi| rsum.at_least(&(&keep * *pi)) < &(&keep * orig.at_least(pi)))
        .cloned()
        .collect()
}

/// Violations of the two-sided low-values sandwich at every positive
/// support point of the original sum: with `D2` the low-merged `D1`,
/// `P1(pi) - 2d <= P2((1-d)pi) - d <= P1((1-2d)pi)`.
pub fn low_values_violations(
    inst: &ProductInstance,
    eps: &Rational,
    delta: &Rational,
    exp: u32,
) -> Vec<Rational> {
    let mut cfg = PtasConfig::new(eps.clone(), ratio(1, 2)).expect("valid");
    cfg.low_threshold_exp = exp;
    let net = cfg.net();
    let rounded: Vec<DiscreteDist> = inst.items().iter().map(|d| round_dist(d, &net)).collect();
    let p1 = Tails::new(&sum_law(&rounded));
    let original = sum_law(inst.items());
    let mut cache: std::collections::HashMap<Vec<usize>, Tails> = Default::default();
    let mut bad = Vec::new();
    for pi in original.support().iter().filter(|v| !v.is_zero()) {
        let cutoff = partmech::ptas::low_cutoff(pi, &cfg);
        let key: Vec<usize> = rounded
            .iter()
            .map(|d| d.support().partition_point(|v| *v < cutoff))
            .collect();
        let p2 = cache.entry(key).or_insert_with(|| {
            let merged: Vec<DiscreteDist> = rounded
                .iter()
                .map(|d| merge_low_values(d, pi, &cfg))
                .collect();
            Tails::new(&sum_law(&merged))
        });
        let left = p1.at_least(pi) - int(2) * delta;
        let middle = p2.at_least(&((Rational::one() - delta) * pi)) - delta;
        let right = p1
            .at_least(&((Rational::one() - int(2) * delta) * pi))
            .clone();
        if left > middle || middle > right {
            bad.push(pi.clone());
        }
    }
    bad
}

/// A two- or three-atom law with a rare large value.
pub fn heavy_tail_item(rng: &mut ChaCha8Rng) -> DiscreteDist {
    let top: i64 = rng.random_range(20..=400);
    let q_den: i64 = rng.random_range(4..=120);
    let mut atoms = vec![
        (int(0), Rational::one() - ratio(1, q_den)),
        (int(top), ratio(1, q_den)),
    ];
    if rng.random_bool(0.5) {
        let mid: i64 = rng.random_range(1..top);
        let m_den: i64 = rng.random_range(4 * q_den..=8 * q_den);
        atoms[0].1 -= ratio(1, m_den);
        atoms.push((int(mid), ratio(1, m_den)));
    }
    DiscreteDist::from_pairs(atoms).expect("valid law")
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Law of a whole bundle when no cap is needed.
pub fn bundle_law(inst: &ProductInstance, items: &[usize]) -> DiscreteDist {
    bundle_sum_dist(inst, items).expect("small bundle")
}
