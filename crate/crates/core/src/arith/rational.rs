//! Exact rational scalars.
//!
//! The scalar type is [`num_rational::BigRational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator, which is
//! exactly the invariant the height computations rely on.  This module adds
//! the parsing, formatting and logarithm helpers the rest of the library
//! needs.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CoreError, Result};

/// Exact rational scalar (always reduced, denominator positive).
pub type Rat = BigRational;

/// Build a rational from an integer pair, reducing to lowest terms.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "rational with zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Build a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Parse `"p/q"` or `"p"` (optionally signed; ASCII or U+2212 minus).
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let cleaned = s.trim().replace('\u{2212}', "-");
    let mut parts = cleaned.splitn(2, '/');
    let num_str = parts.next().unwrap_or("");
    let num: BigInt = num_str
        .trim()
        .parse()
        .map_err(|_| CoreError::domain(format!("invalid rational literal {s:?}")))?;
    let den: BigInt = match parts.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| CoreError::domain(format!("invalid rational literal {s:?}")))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(CoreError::domain(format!(
            "zero denominator in rational literal {s:?}"
        )));
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `"p/q"` rendering (always includes the denominator).
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Natural logarithm of a positive big integer, accurate to a few ulps.
///
/// Uses the top 64 bits as a mantissa so the result stays accurate even when
/// the integer has millions of bits (where `to_f64` would overflow).
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().expect("53 bits fit");
    (top as f64).ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural logarithm of `|n|` for a big integer.
pub fn ln_bigint_abs(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural logarithm of `|r|` for a nonzero rational.
pub fn ln_rat_abs(r: &Rat) -> f64 {
    ln_bigint_abs(r.numer()) - ln_bigint_abs(r.denom())
}

/// Convert to `f64`, using a logarithmic fallback when the parts overflow.
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    if r.is_zero() {
        return 0.0;
    }
    let magnitude = ln_rat_abs(r).exp();
    if r.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `max(|numerator|, denominator)` as a natural logarithm: the height of the
/// projective point `[r : 1]` when `r` is in lowest terms.
pub fn ln_height_rat(r: &Rat) -> f64 {
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    ln_biguint(n.max(d))
}

/// Sign of the rational as -1, 0, or 1.
pub fn rat_sign(r: &Rat) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
