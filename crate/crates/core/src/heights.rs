//! Weil heights over ℚ and ℚ(λ), heights of algebraic numbers, and the
//! naive height decomposition on a fibered surface.
//!
//! All heights are absolute logarithmic heights measured in nats.  Over ℚ a
//! projective point is cleared to coprime integers and the height is the log
//! of the largest absolute value; over ℚ(λ) denominators are cleared to
//! coprime polynomials and the height is the largest degree.  The fiberwise
//! naive height of a point on `y² = x³ + a₄x + a₆` is measured against the
//! divisor class of the zero section, i.e. half the ℙ¹-height of the
//! x-coordinate, which is the normalization the canonical height converges
//! to.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::algebraic::AlgebraicNumber;
use crate::arith::poly::Polynomial;
use crate::arith::rational::{ln_bigint_abs, ln_height_rat, rat_from_str, rat_to_string, Rat};
use crate::arith::ratfunc::RationalFunction;
use crate::error::{CoreError, Result};
use crate::family::WeierstrassFamily;

/// A point of ℙⁿ(ℚ) given by homogeneous rational coordinates.
///
/// Serializes as a list of exact `"p/q"` strings so that no precision is
/// lost on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePointQ {
    pub coords: Vec<Rat>,
}

impl Serialize for ProjectivePointQ {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coords.iter().map(rat_to_string).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjectivePointQ {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coords = strings
            .iter()
            .map(|s| rat_from_str(s).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<Rat>, D::Error>>()?;
        Ok(ProjectivePointQ { coords })
    }
}

/// A point of ℙⁿ(ℚ(λ)) given by homogeneous rational-function coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePointK {
    pub coords: Vec<RationalFunction>,
}

/// Clear homogeneous rational coordinates to coprime integers.
pub fn clear_to_coprime_integers(coords: &[Rat]) -> Result<Vec<BigInt>> {
    if coords.iter().all(|c| c.is_zero()) {
        return Err(CoreError::domain(
            "projective point has all coordinates zero".to_string(),
        ));
    }
    let mut den_lcm = BigInt::one();
    for c in coords {
        den_lcm = den_lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = coords
        .iter()
        .map(|c| c.numer() * (&den_lcm / c.denom()))
        .collect();
    let mut g = BigInt::zero();
    for v in &ints {
        g = g.gcd(v);
    }
    Ok(ints.into_iter().map(|v| v / &g).collect())
}

/// Absolute logarithmic Weil height of a point of ℙⁿ(ℚ), in nats.
pub fn weil_height_q(point: &ProjectivePointQ) -> Result<f64> {
    let ints = clear_to_coprime_integers(&point.coords)?;
    let max = ints
        .iter()
        .map(|v| v.abs())
        .max()
        .expect("nonempty by the all-zero check");
    Ok(ln_bigint_abs(&max))
}

/// Clear homogeneous ℚ(λ)-coordinates to coprime polynomials.
pub fn clear_to_coprime_polynomials(coords: &[RationalFunction]) -> Result<Vec<Polynomial>> {
    if coords.iter().all(|c| c.is_zero()) {
        return Err(CoreError::domain(
            "projective point has all coordinates zero".to_string(),
        ));
    }
    let mut den_lcm = Polynomial::one();
    for c in coords {
        den_lcm = den_lcm.lcm(c.denominator());
    }
    let polys: Vec<Polynomial> = coords
        .iter()
        .map(|c| {
            c.numerator()
                * &den_lcm
                    .exact_div(c.denominator())
                    .expect("lcm is divisible by every denominator")
        })
        .collect();
    let mut g = Polynomial::zero();
    for p in &polys {
        g = g.gcd(p);
    }
    Ok(polys
        .into_iter()
        .map(|p| p.exact_div(&g).expect("gcd divides"))
        .collect())
}

/// Function-field Weil height of a point of ℙⁿ(ℚ(λ)): the maximal degree
/// after clearing to coprime polynomials.  Always a nonnegative integer.
pub fn weil_height_k(point: &ProjectivePointK) -> Result<usize> {
    let polys = clear_to_coprime_polynomials(&point.coords)?;
    Ok(polys
        .iter()
        .map(|p| p.degree_or_zero())
        .max()
        .expect("nonempty by the all-zero check"))
}

/// Absolute logarithmic height of an algebraic number via its Mahler
/// measure: `(log|a_d| + Σ log⁺|αᵢ|)/d`.
pub fn height_algebraic(alpha: &AlgebraicNumber) -> f64 {
    alpha.mahler_height()
}

/// Certify a minimal polynomial, isolate the root near `approx`, and return
/// the height; a reducible polynomial is an error.
pub fn height_algebraic_poly(min_poly: &Polynomial, approx: Complex64) -> Result<f64> {
    Ok(AlgebraicNumber::new(min_poly, approx)?.mahler_height())
}

/// Naive height of a fiber point against the zero-section divisor class:
/// ½·h([x : 1]); the zero of the group is at height 0.
pub fn fiber_naive_height(x: Option<&Rat>) -> f64 {
    match x {
        None => 0.0,
        Some(x) => 0.5 * ln_height_rat(x),
    }
}

/// Height of the base point λ₀ on S, i.e. h([λ₀ : 1]) divided by the degree
/// of the base map (degree 1 here: the base is identified with an open part
/// of the λ-line).  Fibers outside S — where the family degenerates — are
/// rejected.
pub fn base_height(family: &WeierstrassFamily, lambda0: &Rat) -> Result<f64> {
    if !family.is_good_fiber(lambda0) {
        return Err(CoreError::PointOutsideBase);
    }
    Ok(ln_height_rat(lambda0))
}

/// Naive total height of a specialized section value: the fiberwise naive
/// height plus the height of the base point underneath it.
pub fn naive_total_height(
    family: &WeierstrassFamily,
    x: Option<&Rat>,
    lambda0: &Rat,
) -> Result<f64> {
    Ok(fiber_naive_height(x) + base_height(family, lambda0)?)
}
