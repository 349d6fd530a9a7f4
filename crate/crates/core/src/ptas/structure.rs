//! Structural reductions on bundle collections: dissolving bundles that
//! rarely sell, merging many same-scale bundles, and discarding bundles
//! whose price is negligible next to the most expensive one.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{PtasConfig, PtasError};
use crate::dist::{optimal_price, PriceQuote, ProductInstance};
use crate::rational::{int, Rational};

/// `1 - 4 / (delta^2 * k * eps^4)`: Chebyshev lower bound on the sale
/// probability of a bundle merged from `k` same-scale bundles. May be
/// negative (vacuous).
pub fn merged_sell_prob_bound(k: usize, cfg: &PtasConfig) -> Rational {
    let denom = cfg.delta.pow(2) * int(k as i64) * cfg.eps.pow(4);
    Rational::one() - int(4) / denom
}

/// Combines same-scale bundles into one, priced at
/// `(1 - delta/2) * sum_i p_i * pi_i`. The returned quote carries the
/// predicted sale probability lower bound, clamped to `[0, 1]`.
pub fn merge_bundles(quotes: &[PriceQuote], cfg: &PtasConfig) -> Result<PriceQuote, PtasError> {
    let top = quotes
        .iter()
        .map(|q| &q.price)
        .max()
        .ok_or(PtasError::EmptyMerge)?;
    for (i, q) in quotes.iter().enumerate() {
        if q.sell_prob < cfg.eps {
            return Err(PtasError::MergePrecondition(format!(
                "quote {i} sells with probability below eps"
            )));
        }
        if q.price < &cfg.eps * top {
            return Err(PtasError::MergePrecondition(format!(
                "quote {i} lies outside the interval [eps*pi, pi]"
            )));
        }
    }
    let expected: Rational = quotes.iter().map(|q| &q.sell_prob * &q.price).sum();
    let discount = Rational::one() - &cfg.delta / int(2);
    let price = discount * expected;
    let bound = merged_sell_prob_bound(quotes.len(), cfg);
    let sell_prob = if bound.is_negative() {
        Rational::zero()
    } else {
        bound
    };
    Ok(PriceQuote::new(price, sell_prob))
}

/// The Chebyshev tail bound used inside the merge argument:
/// `Pr[sum capped <= (1 - delta/2) * sum p_i pi_i] <= sum pi_i^2 / ((delta/2) sum p_i pi_i)^2`.
pub fn merge_chebyshev_tail(quotes: &[PriceQuote], cfg: &PtasConfig) -> Rational {
    let expected: Rational = quotes.iter().map(|q| &q.sell_prob * &q.price).sum();
    let second: Rational = quotes.iter().map(|q| &q.price * &q.price).sum();
    let half_delta = &cfg.delta / int(2);
    second / (half_delta * expected).pow(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingletonizeDecision {
    /// The bundle rarely sells and should be sold item by item.
    pub dissolve: bool,
    /// Guaranteed revenue from separate sale, `(1 - delta) * sell_prob * price`.
    pub floor: Rational,
    /// Whether `eps <= delta^3 / 4`, the regime in which `floor` is guaranteed.
    pub guarantee_applies: bool,
    /// Measured revenue from pricing the bundle's items separately.
    pub separate_revenue: Rational,
}

pub fn singletonize_check(
    inst: &ProductInstance,
    bundle: &[usize],
    quote: &PriceQuote,
    cfg: &PtasConfig,
) -> SingletonizeDecision {
    let floor = (Rational::one() - &cfg.delta) * &quote.sell_prob * &quote.price;
    let guarantee_applies = cfg.eps <= cfg.delta.pow(3) / int(4);
    let separate_revenue = bundle
        .iter()
        .map(|&i| optimal_price(inst.item(i)).revenue)
        .sum();
    SingletonizeDecision {
        dissolve: quote.sell_prob <= cfg.eps,
        floor,
        guarantee_applies,
        separate_revenue,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeFilter {
    /// Indices (into the input) of the quotes priced at least `eta * pi*`.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// `k * eta * pi* / (1 - eps)` with `k = merge_k`: bound on the revenue
    /// the dropped bundles can carry.
    pub discarded_revenue_bound: Rational,
}

impl RangeFilter {
    pub fn kept_quotes(&self, quotes: &[PriceQuote]) -> Vec<PriceQuote> {
        self.kept.iter().map(|&i| quotes[i].clone()).collect()
    }
}

pub fn drop_low_bundles(quotes: &[PriceQuote], cfg: &PtasConfig) -> RangeFilter {
    let top = quotes
        .iter()
        .map(|q| q.price.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let threshold = &cfg.range_eta * &top;
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..quotes.len()).partition(|&i| quotes[i].price >= threshold);
    let discarded_revenue_bound = Rational::from_integer(BigInt::from(cfg.merge_k)) * threshold
        / (Rational::one() - &cfg.eps);
    RangeFilter {
        kept,
        dropped,
        discarded_revenue_bound,
    }
}
