use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use partmech::dist::{brev, srev};
use partmech::exact::{bell_number, enumerate_partitions, solve_exact, DEFAULT_MAX_N};
use partmech::generators::gen_random;
use partmech::mechanism::eval_partition;
use partmech::ptas::{solve_ptas, PtasConfig};
use partmech::{DiscreteDist, ProductInstance, Rational};

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_item() -> impl Strategy<Value = DiscreteDist> {
    proptest::collection::vec((0i64..12, 1i64..6), 1..4).prop_map(|atoms| {
        let total: i64 = atoms.iter().map(|a| a.1).sum();
        DiscreteDist::from_pairs(
            atoms
                .into_iter()
                .map(|(v, w)| (ratio(v, 1), ratio(w, total))),
        )
        .unwrap()
    })
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = ProductInstance> {
    proptest::collection::vec(arb_item(), 1..=max_n)
        .prop_map(|items| ProductInstance::new(items).unwrap())
}

/// Every set partition of `items`, built recursively: the first element
/// joins each block of a partition of the rest, or starts its own.
fn partitions_of(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for p in partitions_of(rest) {
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.insert(0, vec![first]);
        out.push(q);
    }
    out
}

/// Best single-bundle revenue by enumerating value profiles directly.
fn naive_bundle_revenue(inst: &ProductInstance, bundle: &[usize]) -> Rational {
    let mut atoms: Vec<(Rational, Rational)> = vec![(Rational::zero(), ratio(1, 1))];
    for &i in bundle {
        atoms = atoms
            .iter()
            .flat_map(|(s, p)| inst.item(i).iter().map(move |(v, q)| (s + v, p * q)))
            .collect();
    }
    atoms
        .iter()
        .map(|(price, _)| {
            let sells: Rational = atoms
                .iter()
                .filter(|(s, _)| s >= price)
                .map(|(_, p)| p.clone())
                .sum();
            price * sells
        })
        .max()
        .unwrap()
}

fn naive_prev(inst: &ProductInstance) -> Rational {
    let items: Vec<usize> = (0..inst.n()).collect();
    partitions_of(&items)
        .iter()
        .map(|p| {
            p.iter()
                .map(|b| naive_bundle_revenue(inst, b))
                .sum::<Rational>()
        })
        .max()
        .unwrap()
}

#[test]
fn enumeration_matches_bell_numbers() {
    for n in 0..=9 {
        assert_eq!(enumerate_partitions(n).count() as u128, bell_number(n));
        if n > 0 {
            let items: Vec<usize> = (0..n).collect();
            assert_eq!(partitions_of(&items).len() as u128, bell_number(n));
        }
    }
}

#[test]
fn oracle_matches_naive_search_on_seeded_instances() {
    for seed in 0..30 {
        let inst = gen_random(1 + (seed % 5) as usize, 3, 8, seed).unwrap();
        let report = solve_exact(&inst, DEFAULT_MAX_N).unwrap();
        assert_eq!(report.revenue, naive_prev(&inst), "seed {seed}");
        assert_eq!(eval_partition(&inst, &report.best).unwrap(), report.revenue);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_matches_naive_search(inst in arb_instance(4)) {
        prop_assert_eq!(solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue, naive_prev(&inst));
    }

    #[test]
    fn oracle_is_permutation_invariant(inst in arb_instance(5), rot in 0usize..5) {
        let mut items = inst.items().to_vec();
        let r = rot % items.len();
        items.rotate_left(r);
        items.reverse();
        let permuted = ProductInstance::new(items).unwrap();
        prop_assert_eq!(
            solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue,
            solve_exact(&permuted, DEFAULT_MAX_N).unwrap().revenue
        );
    }

    #[test]
    fn oracle_dominates_benchmarks_and_approximation(inst in arb_instance(5)) {
        let exact = solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue;
        let ptas = solve_ptas(&inst, &PtasConfig::new(ratio(1, 4), ratio(1, 2)).unwrap()).unwrap().revenue;
        let s = srev(&inst).0;
        let b = brev(&inst).unwrap().revenue;
        prop_assert!(exact >= s && exact >= b);
        prop_assert!(exact >= ptas);
        prop_assert!(ptas >= s && ptas >= b);
    }

    #[test]
    fn adding_an_item_never_lowers_revenue(inst in arb_instance(5), extra in arb_item()) {
        let base = solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue;
        let mut items = inst.items().to_vec();
        items.push(extra);
        let grown = solve_exact(&ProductInstance::new(items).unwrap(), DEFAULT_MAX_N).unwrap().revenue;
        prop_assert!(grown >= base);
    }

    #[test]
    fn duplicating_an_item_never_lowers_revenue(inst in arb_instance(4)) {
        let base = solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue;
        let mut items = inst.items().to_vec();
        items.push(items[0].clone());
        let grown = solve_exact(&ProductInstance::new(items).unwrap(), DEFAULT_MAX_N).unwrap().revenue;
        prop_assert!(grown >= base);
    }

    #[test]
    fn shifting_values_up_never_lowers_revenue(inst in arb_instance(5), shift in 1i64..5) {
        let base = solve_exact(&inst, DEFAULT_MAX_N).unwrap().revenue;
        let mut items = inst.items().to_vec();
        items[0] = DiscreteDist::from_pairs(items[0].iter().map(|(v, p)| (v + ratio(shift, 1), p.clone()))).unwrap();
        let up = solve_exact(&ProductInstance::new(items).unwrap(), DEFAULT_MAX_N).unwrap().revenue;
        prop_assert!(up >= base);
    }
}
