//! Exact rational helpers shared by every module.
//!
//! All revenue, price and probability arithmetic in this crate is carried out
//! on [`Rational`] (an arbitrary-precision `BigRational`). Floating point only
//! appears in index estimates that are always corrected by an exact check.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d`, reduced. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `"p/q"`, `"n"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: s.to_string(),
        reason,
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let num: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| err("not an integer"))?;
    Ok(Rational::from_integer(n))
}

/// Canonical string form: `"n"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with `places` fractional digits, rounding half away
/// from zero.
pub fn to_decimal(x: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = x.abs() * Rational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice_r: BigInt = r * 2;
    let rounded = if &twice_r >= scaled.denom() { q + 1 } else { q };
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if x.is_negative() && !rounded_is_zero(&whole, &frac) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!(
            "{sign}{whole}.{:0>width$}",
            frac.to_string(),
            width = places
        )
    }
}

fn rounded_is_zero(whole: &BigInt, frac: &BigInt) -> bool {
    whole.is_zero() && frac.is_zero()
}

/// Approximate natural log of a positive rational. Works far outside the
/// `f64` exponent range.
pub fn ln_approx(x: &Rational) -> f64 {
    debug_assert!(x.is_positive());
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::MAX).ln() + (shift as f64) * std::f64::consts::LN_2
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let l = ln_approx(&x.abs());
        let m = l.exp();
        if x.is_negative() {
            -m
        } else {
            m
        }
    })
}

/// Smallest integer `>= x`.
pub fn ceil_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

pub fn is_in_open_unit(x: &Rational) -> bool {
    x.is_positive() && x < &Rational::one()
}

/// Wrapper to print a rational in canonical string form.
pub struct Show<'a>(pub &'a Rational);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}
