//! Partition mechanisms (and choose-one menus, for comparison).
//!
//! A partition mechanism splits the items into disjoint bundles and posts one
//! price per bundle. The buyer's decision for each bundle is local, so the
//! expected revenue is the sum over bundles of `price * Pr[bundle value >= price]`.

use num_traits::{One, Signed, Zero};

use crate::dist::{bundle_sum_dist, exceedance, optimal_price, DistError, ProductInstance};
use crate::rational::{format_rational, Rational};

/// Default bound on the number of valuation profiles [`eval_menu`] enumerates.
pub const DEFAULT_PROFILE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MechanismError {
    #[error("item {0} is covered by more than one bundle")]
    Overlap(usize),
    #[error("item {0} is not covered by any bundle")]
    Uncovered(usize),
    #[error("bundle {0} is empty")]
    EmptyBundle(usize),
    #[error("item index {index} out of range for {n} items")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("negative price {0}")]
    NegativePrice(String),
    #[error("menu option {0} lists an item twice")]
    DuplicateInOption(usize),
    #[error("instance too large: {profiles} valuation profiles exceed the cap of {cap}")]
    InstanceTooLarge { profiles: String, cap: u64 },
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle {
    pub items: Vec<usize>,
    pub price: Rational,
}

/// Disjoint bundles covering every item, each with a posted price.
///
/// A price above the bundle's largest possible value withholds the bundle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PricedPartition {
    bundles: Vec<Bundle>,
}

impl PricedPartition {
    /// Stores the bundles in canonical order: items ascending within each
    /// bundle, bundles ordered by their smallest item.
    pub fn new(mut bundles: Vec<Bundle>) -> Self {
        for b in &mut bundles {
            b.items.sort_unstable();
        }
        bundles.sort_by(|a, b| a.items.first().cmp(&b.items.first()));
        Self { bundles }
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.bundles.iter().map(|b| b.items.clone()).collect()
    }

    pub fn validate(&self, n: usize) -> Result<(), MechanismError> {
        for b in &self.bundles {
            if b.price.is_negative() {
                return Err(MechanismError::NegativePrice(format_rational(&b.price)));
            }
        }
        validate_partition(n, self.bundles.iter().map(|b| b.items.as_slice()))
    }
}

/// Checks that `blocks` is a partition of `0..n` into non-empty blocks.
pub fn validate_partition<'a, I>(n: usize, blocks: I) -> Result<(), MechanismError>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut covered = vec![false; n];
    for (k, block) in blocks.into_iter().enumerate() {
        if block.is_empty() {
            return Err(MechanismError::EmptyBundle(k));
        }
        for &i in block {
            if i >= n {
                return Err(MechanismError::IndexOutOfRange { index: i, n });
            }
            if covered[i] {
                return Err(MechanismError::Overlap(i));
            }
            covered[i] = true;
        }
    }
    match covered.iter().position(|c| !c) {
        Some(i) => Err(MechanismError::Uncovered(i)),
        None => Ok(()),
    }
}

/// Expected revenue of one bundle at one price.
pub fn bundle_revenue(
    inst: &ProductInstance,
    items: &[usize],
    price: &Rational,
) -> Result<Rational, MechanismError> {
    let d = bundle_sum_dist(inst, items)?;
    Ok(price * exceedance(&d, price))
}

/// Exact expected revenue of a partition mechanism.
pub fn eval_partition(
    inst: &ProductInstance,
    pp: &PricedPartition,
) -> Result<Rational, MechanismError> {
    pp.validate(inst.n())?;
    let mut total = Rational::zero();
    for b in pp.bundles() {
        total += bundle_revenue(inst, &b.items, &b.price)?;
    }
    Ok(total)
}

/// Prices each block at its own optimal price. Bundle prices decouple, so
/// the result is the best mechanism with this partition; its exact revenue
/// is returned alongside.
pub fn optimize_prices(
    inst: &ProductInstance,
    partition: &[Vec<usize>],
) -> Result<(PricedPartition, Rational), MechanismError> {
    validate_partition(inst.n(), partition.iter().map(Vec::as_slice))?;
    let mut bundles = Vec::with_capacity(partition.len());
    let mut total = Rational::zero();
    for block in partition {
        let q = optimal_price(&bundle_sum_dist(inst, block)?);
        total += &q.revenue;
        bundles.push(Bundle {
            items: block.clone(),
            price: q.price,
        });
    }
    Ok((PricedPartition::new(bundles), total))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenuOption {
    pub items: Vec<usize>,
    pub price: Rational,
}

/// A deterministic menu: the buyer takes at most one option. Taking nothing
/// for free is always available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChooseOneMenu {
    pub options: Vec<MenuOption>,
}

impl ChooseOneMenu {
    pub fn validate(&self, n: usize) -> Result<(), MechanismError> {
        for (k, opt) in self.options.iter().enumerate() {
            if opt.price.is_negative() {
                return Err(MechanismError::NegativePrice(format_rational(&opt.price)));
            }
            let mut seen = vec![false; n];
            for &i in &opt.items {
                if i >= n {
                    return Err(MechanismError::IndexOutOfRange { index: i, n });
                }
                if seen[i] {
                    return Err(MechanismError::DuplicateInOption(k));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

pub fn eval_menu(inst: &ProductInstance, menu: &ChooseOneMenu) -> Result<Rational, MechanismError> {
    eval_menu_capped(inst, menu, DEFAULT_PROFILE_CAP)
}

/// Expected payment under a choose-one menu, by full profile enumeration.
///
/// The buyer maximizes `value(set) - price`; ties go to the higher price,
/// then to the earlier option.
pub fn eval_menu_capped(
    inst: &ProductInstance,
    menu: &ChooseOneMenu,
    cap: u64,
) -> Result<Rational, MechanismError> {
    menu.validate(inst.n())?;
    let mut profiles: u128 = 1;
    for d in inst.items() {
        profiles = profiles.saturating_mul(d.len() as u128);
    }
    if profiles > cap as u128 {
        return Err(MechanismError::InstanceTooLarge {
            profiles: profiles.to_string(),
            cap,
        });
    }

    let n = inst.n();
    let mut digits = vec![0usize; n];
    let mut total = Rational::zero();
    loop {
        let mut prob = Rational::one();
        for (d, &k) in inst.items().iter().zip(&digits) {
            prob *= &d.probs()[k];
        }
        let value_of = |items: &[usize]| -> Rational {
            items
                .iter()
                .map(|&i| &inst.item(i).support()[digits[i]])
                .sum()
        };
        let mut best_util = Rational::zero();
        let mut best_price = Rational::zero();
        for opt in &menu.options {
            let util = value_of(&opt.items) - &opt.price;
            if util > best_util || (util == best_util && opt.price > best_price) {
                best_util = util;
                best_price = opt.price.clone();
            }
        }
        total += prob * best_price;

        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(total);
            }
            digits[pos] += 1;
            if digits[pos] < inst.item(pos).len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
