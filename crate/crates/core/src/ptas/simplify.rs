//! Per-item distribution simplification for a guessed price scale `pi`.
//!
//! The chain is: round to the net ([`round_dist`]), blur the low values into
//! their conditional mean ([`merge_low_values`]), then zero out unlikely high
//! values ([`prune_high_values`]). Rounding and pruning only move mass down,
//! so their outputs are stochastically dominated by their inputs.

use num_traits::{One, Zero};

use super::{Net, PtasConfig};
use crate::dist::DiscreteDist;
use crate::rational::Rational;

/// Rounds every support value down to the net, then every probability down
/// to the net; the lost probability mass is moved to value zero.
pub fn round_dist(d: &DiscreteDist, net: &Net) -> DiscreteDist {
    let rounded_values = d.iter().map(|(v, p)| (net.round_down(v), p.clone()));
    let merged = DiscreteDist::from_pairs(rounded_values).expect("rounding keeps a valid law");
    settle_on_net(merged.iter().map(|(v, p)| (v.clone(), p.clone())), net)
}

/// Rounds the probability of every positive value down to the net and puts
/// the remaining mass on zero.
fn settle_on_net<I>(atoms: I, net: &Net) -> DiscreteDist
where
    I: IntoIterator<Item = (Rational, Rational)>,
{
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    let mut kept = Rational::zero();
    for (v, p) in atoms {
        if v.is_zero() {
            continue;
        }
        let p = net.round_down(&p);
        kept += &p;
        out.push((v, p));
    }
    out.push((Rational::zero(), Rational::one() - kept));
    DiscreteDist::from_pairs(out).expect("mass moved to zero keeps a valid law")
}

/// Cutoff `eps^p * pi` separating low values from the high window.
pub fn low_cutoff(pi: &Rational, cfg: &PtasConfig) -> Rational {
    let exp = i32::try_from(cfg.low_threshold_exp).expect("small exponent");
    cfg.eps.pow(exp) * pi
}

/// Collapses every value below `cutoff` into a single atom at the
/// conditional mean, without any net rounding. Returns the input unchanged
/// when nothing lies below the cutoff.
pub fn collapse_low_values(d: &DiscreteDist, cutoff: &Rational) -> DiscreteDist {
    let end = d.support().partition_point(|v| v < cutoff);
    if end == 0 {
        return d.clone();
    }
    let mass: Rational = d.probs()[..end].iter().sum();
    let weighted: Rational = d.iter().take(end).map(|(v, p)| v * p).sum();
    let mean = weighted / &mass;
    let atoms = std::iter::once((mean, mass))
        .chain(d.iter().skip(end).map(|(v, p)| (v.clone(), p.clone())));
    DiscreteDist::from_pairs(atoms).expect("collapse keeps a valid law")
}

/// Replaces the values below `eps^p * pi` by their conditional mean, then
/// rounds that new atom's value and probability down to the net. If nothing
/// lies below the cutoff the input is returned unchanged.
pub fn merge_low_values(d: &DiscreteDist, pi: &Rational, cfg: &PtasConfig) -> DiscreteDist {
    let cutoff = low_cutoff(pi, cfg);
    let end = d.support().partition_point(|v| *v < cutoff);
    if end == 0 {
        return d.clone();
    }
    let collapsed = collapse_low_values(d, &cutoff);
    let net = cfg.net();
    let (mean, mass) = collapsed
        .iter()
        .next()
        .map(|(v, p)| (v.clone(), p.clone()))
        .expect("collapsed atom exists");
    let value = net.round_down(&mean);
    let prob = net.round_down(&mass);
    let deficit = &mass - &prob;
    let atoms = std::iter::once((value, prob))
        .chain(std::iter::once((Rational::zero(), deficit)))
        .chain(
            collapsed
                .iter()
                .skip(1)
                .map(|(v, p)| (v.clone(), p.clone())),
        );
    DiscreteDist::from_pairs(atoms).expect("merge keeps a valid law")
}

/// Largest probability of any support value in the high window
/// `[eps^p * pi, pi]`, or zero if the window is empty.
pub fn window_peak(d: &DiscreteDist, pi: &Rational, cfg: &PtasConfig) -> Rational {
    let lo = low_cutoff(pi, cfg);
    d.iter()
        .filter(|(v, _)| **v >= lo && *v <= pi)
        .map(|(_, p)| p.clone())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Moves to zero every high-window value whose probability is below
/// `eps^4 * p*`, where `p*` is the window's peak probability. Returns the
/// pruned law and `p*`.
pub fn prune_high_values(
    d: &DiscreteDist,
    pi: &Rational,
    cfg: &PtasConfig,
) -> (DiscreteDist, Rational) {
    let pstar = window_peak(d, pi, cfg);
    if pstar.is_zero() {
        return (d.clone(), pstar);
    }
    let lo = low_cutoff(pi, cfg);
    let threshold = cfg.eps.pow(4) * &pstar;
    let mut pruned = false;
    let atoms: Vec<(Rational, Rational)> = d
        .iter()
        .map(|(v, p)| {
            if *v >= lo && v <= pi && *p < threshold {
                pruned = true;
                (Rational::zero(), p.clone())
            } else {
                (v.clone(), p.clone())
            }
        })
        .collect();
    if !pruned {
        return (d.clone(), pstar);
    }
    (
        DiscreteDist::from_pairs(atoms).expect("pruning keeps a valid law"),
        pstar,
    )
}

/// The full chain for one item at scale `pi`, starting from its net-rounded
/// law (rounding does not depend on `pi`).
pub fn simplify_rounded(rounded: &DiscreteDist, pi: &Rational, cfg: &PtasConfig) -> DiscreteDist {
    let merged = merge_low_values(rounded, pi, cfg);
    prune_high_values(&merged, pi, cfg).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::exceedance;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn dist(pairs: &[(Rational, Rational)]) -> DiscreteDist {
        DiscreteDist::from_pairs(pairs.iter().cloned()).unwrap()
    }

    fn cfg(eps: Rational, exp: u32) -> PtasConfig {
        let mut c = PtasConfig::new(eps, ratio(1, 2)).unwrap();
        c.low_threshold_exp = exp;
        c
    }

    #[test]
    fn rounding_point_mass_at_one_is_identity() {
        for e in [ratio(1, 10), ratio(1, 4), ratio(1, 2)] {
            let d = DiscreteDist::point_mass(int(1));
            assert_eq!(round_dist(&d, &Net::new(e)), d);
        }
    }

    #[test]
    fn rounding_keeps_exact_net_members() {
        // 3/2 is (1 + 1/2)^1.
        let d = DiscreteDist::point_mass(ratio(3, 2));
        assert_eq!(round_dist(&d, &Net::new(ratio(1, 2))), d);
        let d = DiscreteDist::point_mass(int(2));
        assert_eq!(
            round_dist(&d, &Net::new(ratio(1, 2))),
            DiscreteDist::point_mass(ratio(3, 2))
        );
    }

    #[test]
    fn rounding_values_and_probabilities() {
        let net = Net::new(ratio(1, 10));
        let d = dist(&[(int(2), ratio(3, 10)), (int(0), ratio(7, 10))]);
        let r = round_dist(&d, &net);
        let value = ratio(11, 10).pow(7);
        let prob = ratio(10, 11).pow(13);
        assert_eq!(r, dist(&[(value, prob.clone()), (int(0), int(1) - prob)]));
    }

    #[test]
    fn merge_leaves_high_only_laws_alone() {
        let c = cfg(ratio(1, 2), 1);
        let d = dist(&[(int(3), ratio(1, 2)), (int(4), ratio(1, 2))]);
        assert_eq!(merge_low_values(&d, &int(4), &c), d);
        let z = DiscreteDist::point_mass(int(0));
        assert_eq!(merge_low_values(&z, &int(4), &c), z);
    }

    #[test]
    fn merge_equal_revenue_low_part() {
        let er = dist(&[
            (int(1), ratio(1, 2)),
            (int(2), ratio(1, 6)),
            (int(3), ratio(1, 12)),
            (int(4), ratio(1, 4)),
        ]);
        // eps = 3/4 with exponent 1 puts the cutoff at 3 for pi = 4.
        let c = cfg(ratio(3, 4), 1);
        assert_eq!(low_cutoff(&int(4), &c), int(3));
        assert_eq!(
            collapse_low_values(&er, &int(3)),
            dist(&[
                (ratio(5, 4), ratio(2, 3)),
                (int(3), ratio(1, 12)),
                (int(4), ratio(1, 4))
            ])
        );
        // Net base 7/4: 5/4 rounds to 1 and 2/3 rounds to 4/7.
        assert_eq!(
            merge_low_values(&er, &int(4), &c),
            dist(&[
                (int(0), ratio(2, 21)),
                (int(1), ratio(4, 7)),
                (int(3), ratio(1, 12)),
                (int(4), ratio(1, 4)),
            ])
        );
    }

    #[test]
    fn prune_examples() {
        let eps = ratio(1, 2);
        let c = cfg(eps.clone(), 1);
        let single = dist(&[(int(0), ratio(1, 2)), (int(8), ratio(1, 2))]);
        assert_eq!(
            prune_high_values(&single, &int(8), &c),
            (single.clone(), ratio(1, 2))
        );

        let small = ratio(1, 5) * eps.pow(5);
        let two = dist(&[
            (int(0), int(1) - ratio(1, 5) - &small),
            (int(5), ratio(1, 5)),
            (int(7), small.clone()),
        ]);
        let (pruned, pstar) = prune_high_values(&two, &int(8), &c);
        assert_eq!(pstar, ratio(1, 5));
        assert_eq!(
            pruned,
            dist(&[(int(0), int(1) - ratio(1, 5)), (int(5), ratio(1, 5))])
        );

        let rare = dist(&[(int(1), ratio(9, 10)), (int(10), ratio(1, 10))]);
        assert_eq!(
            prune_high_values(&rare, &int(10), &c),
            (rare.clone(), ratio(1, 10))
        );

        let empty_window = dist(&[(int(1), int(1))]);
        assert_eq!(
            prune_high_values(&empty_window, &int(10), &c),
            (empty_window.clone(), int(0))
        );
    }

    fn arb_dist() -> impl Strategy<Value = DiscreteDist> {
        proptest::collection::vec((0i64..40, 1i64..9), 1..6).prop_map(|atoms| {
            let total: i64 = atoms.iter().map(|a| a.1).sum();
            DiscreteDist::from_pairs(
                atoms
                    .into_iter()
                    .map(|(v, w)| (ratio(v, 3), ratio(w, total))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn rounding_and_pruning_are_dominated(d in arb_dist(), e in 1i64..5, pi in 1i64..15, exp in 1u32..3) {
            let c = cfg(ratio(e, 10), exp);
            let r = round_dist(&d, &c.net());
            let (pr, _) = prune_high_values(&r, &int(pi), &c);
            for t in 0..45 {
                let t = ratio(t, 3);
                prop_assert!(exceedance(&r, &t) <= exceedance(&d, &t));
                prop_assert!(exceedance(&pr, &t) <= exceedance(&r, &t));
            }
        }

        #[test]
        fn merge_preserves_mean_up_to_rounding(d in arb_dist(), e in 1i64..5, pi in 1i64..15) {
            let c = cfg(ratio(e, 10), 1);
            let cutoff = low_cutoff(&int(pi), &c);
            let collapsed = collapse_low_values(&d, &cutoff);
            prop_assert_eq!(collapsed.mean(), d.mean());
            let merged = merge_low_values(&d, &int(pi), &c);
            prop_assert!(merged.mean() <= d.mean());
            let base = c.net().base().clone();
            // Rounding value and probability each lose at most a (1+eps) factor.
            let low_mass: Rational = d.iter().filter(|(v, _)| **v < cutoff).map(|(v, p)| v * p).sum();
            prop_assert!(merged.mean() >= d.mean() - &low_mass + &low_mass / (&base * &base));
        }
    }
}
