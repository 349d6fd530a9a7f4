//! Grouping of simplified items into interchangeable buckets.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::simplify::{low_cutoff, window_peak};
use super::{Net, PtasConfig};
use crate::dist::{optimal_price, DiscreteDist, ProductInstance};
use crate::rational::{int, Rational};

/// Proximity of a high-window atom's probability to the window peak `p*`.
pub const PATTERN_ABSENT: u8 = 0;
pub const PATTERN_FAR: u8 = 1;
pub const PATTERN_NEAR: u8 = 2;
pub const PATTERN_PEAK: u8 = 3;

/// Compressed description of one simplified item at a fixed price scale.
///
/// Each class is a net exponent, or `None` for ZERO. Items with equal keys
/// are treated as identical by the allocation search.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketKey {
    pub low_expectation_class: Option<i64>,
    pub pstar_pi_class: Option<i64>,
    pub srev_class: Option<i64>,
    /// One 2-bit code per net point of the high window, lowest first; mass
    /// above `pi` is counted at `pi`.
    pub high_pattern: Vec<u8>,
}

/// Net exponent of `x` clamped to the window `[pi/n^2, pi]`; ZERO below it.
fn window_class(net: &Net, x: &Rational, floor: &Rational, top: i64) -> Option<i64> {
    if !x.is_positive() || x < floor {
        return None;
    }
    net.floor_index(x).map(|j| j.min(top))
}

fn pattern_code(p: &Rational, pstar: &Rational, eps: &Rational) -> u8 {
    if p.is_zero() {
        PATTERN_ABSENT
    } else if pstar.is_zero() || *p >= eps * pstar {
        PATTERN_PEAK
    } else if *p >= eps * eps * pstar {
        PATTERN_NEAR
    } else {
        PATTERN_FAR
    }
}

/// Key of one simplified item at scale `pi` in an `n`-item instance.
pub fn bucket_key(d: &DiscreteDist, n: usize, pi: &Rational, cfg: &PtasConfig) -> BucketKey {
    let net = cfg.net();
    let nn = int(n as i64);
    let floor = pi / (&nn * &nn);
    let top = net.floor_index(pi).expect("pi is positive");
    let cutoff = low_cutoff(pi, cfg);

    let low_end = d.support().partition_point(|v| *v < cutoff);
    let low_mean = if low_end == 0 {
        Rational::zero()
    } else {
        let mass: Rational = d.probs()[..low_end].iter().sum();
        let w: Rational = d.iter().take(low_end).map(|(v, p)| v * p).sum();
        w / mass
    };
    let pstar = window_peak(d, pi, cfg);
    let pstar_pi = &pstar * pi;
    let separate = optimal_price(d).revenue;

    let mut values = [
        net.round_down(&low_mean),
        net.round_down(&pstar_pi),
        net.round_down(&separate),
    ];
    // A class far below the largest of the three is treated as zero.
    let largest = values.iter().max().cloned().expect("three classes");
    for v in values.iter_mut() {
        if *v < &cfg.zero_ratio * &largest {
            *v = Rational::zero();
        }
    }
    let [low, peak, sep] = values;

    let mut high_pattern = Vec::new();
    for j in net.indices_between(&cutoff, pi) {
        let point = net.point(j);
        let mut p = d.prob_of(&point);
        if j == top {
            p += d
                .iter()
                .filter(|(v, _)| *v > pi)
                .map(|(_, q)| q.clone())
                .sum::<Rational>();
        }
        high_pattern.push(pattern_code(&p, &pstar, &cfg.eps));
    }

    BucketKey {
        low_expectation_class: window_class(&net, &low, &floor, top),
        pstar_pi_class: window_class(&net, &peak, &floor, top),
        srev_class: window_class(&net, &sep, &floor, top),
        high_pattern,
    }
}

/// Maps each bucket key to the items carrying it, in ascending index order.
pub fn bucketize(
    inst: &ProductInstance,
    pi: &Rational,
    cfg: &PtasConfig,
) -> BTreeMap<BucketKey, Vec<usize>> {
    let mut buckets: BTreeMap<BucketKey, Vec<usize>> = BTreeMap::new();
    for (i, d) in inst.items().iter().enumerate() {
        buckets
            .entry(bucket_key(d, inst.n(), pi, cfg))
            .or_default()
            .push(i);
    }
    buckets
}
