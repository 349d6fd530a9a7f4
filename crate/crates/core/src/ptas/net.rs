use num_traits::{One, Signed, Zero};

use crate::rational::{ln_approx, Rational};

/// Multiplicative net `{0} ∪ {(1+eps)^j : j ∈ Z}` over the non-negative
/// rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    eps: Rational,
    base: Rational,
}

impl Net {
    /// Panics unless `eps > 0`; use [`Net::try_new`] for a checked build.
    pub fn new(eps: Rational) -> Self {
        Self::try_new(eps).expect("net granularity must be positive")
    }

    pub fn try_new(eps: Rational) -> Option<Self> {
        if !eps.is_positive() {
            return None;
        }
        let base = Rational::one() + &eps;
        Some(Self { eps, base })
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    /// `(1+eps)^j`.
    pub fn point(&self, j: i64) -> Rational {
        let e = i32::try_from(j).expect("net exponent fits in i32");
        self.base.pow(e)
    }

    /// Largest `j` with `(1+eps)^j <= x`, for `x > 0`.
    pub fn floor_index(&self, x: &Rational) -> Option<i64> {
        if !x.is_positive() {
            return None;
        }
        let est = (ln_approx(x) / ln_approx(&self.base)).floor() as i64;
        let mut j = est;
        while self.point(j) > *x {
            j -= 1;
        }
        while self.point(j + 1) <= *x {
            j += 1;
        }
        Some(j)
    }

    /// Smallest `j` with `(1+eps)^j >= x`, for `x > 0`.
    pub fn ceil_index(&self, x: &Rational) -> Option<i64> {
        let j = self.floor_index(x)?;
        Some(if self.point(j) == *x { j } else { j + 1 })
    }

    /// Largest net member `<= x`; zero maps to zero.
    pub fn round_down(&self, x: &Rational) -> Rational {
        match self.floor_index(x) {
            Some(j) => self.point(j),
            None => Rational::zero(),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        x.is_zero() || (x.is_positive() && self.round_down(x) == *x)
    }

    /// Exponents `j` with `lo <= (1+eps)^j <= hi`, ascending.
    pub fn indices_between(&self, lo: &Rational, hi: &Rational) -> std::ops::RangeInclusive<i64> {
        match (self.ceil_index(lo), self.floor_index(hi)) {
            (Some(a), Some(b)) => a..=b,
            // Empty.
            _ => std::ops::RangeInclusive::new(1, 0),
        }
    }
}
