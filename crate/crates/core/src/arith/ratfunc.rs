//! Rational functions in the base parameter λ.
//!
//! Canonical form: numerator and denominator are coprime and the denominator
//! is monic and nonzero.  Zero is `0/1`.  With that normalization equality is
//! plain coefficient equality and the function-field height is read directly
//! off the degrees.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::poly::Polynomial;
use crate::arith::rational::Rat;
use crate::error::{CoreError, Result};

/// Element of ℚ(λ) in lowest terms with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRatFunc", into = "RawRatFunc")]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct RawRatFunc {
    num: Polynomial,
    den: Polynomial,
}

impl From<RationalFunction> for RawRatFunc {
    fn from(f: RationalFunction) -> Self {
        RawRatFunc {
            num: f.num,
            den: f.den,
        }
    }
}

impl TryFrom<RawRatFunc> for RationalFunction {
    type Error = CoreError;
    fn try_from(raw: RawRatFunc) -> Result<Self> {
        RationalFunction::new(raw.num, raw.den)
    }
}

impl RationalFunction {
    /// Normalize a numerator/denominator pair: cancel the gcd and make the
    /// denominator monic.  A zero denominator is rejected.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(CoreError::DivisionByZeroPoly);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::one(),
            });
        }
        let g = num.gcd(&den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        let lead = den.leading();
        if !lead.is_one() {
            let inv = lead.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn from_rat(c: Rat) -> Self {
        RationalFunction::from_poly(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        RationalFunction::from_poly(Polynomial::zero())
    }

    pub fn one() -> Self {
        RationalFunction::from_poly(Polynomial::one())
    }

    /// The coordinate function λ.
    pub fn var() -> Self {
        RationalFunction::from_poly(Polynomial::var())
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    /// The constant value, if this is a constant function.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    /// Exact evaluation at λ = λ₀; a pole reports where the section failed.
    pub fn eval(&self, lambda: &Rat) -> Result<Rat> {
        let den = self.den.eval(lambda);
        if den.is_zero() {
            return Err(CoreError::SectionUndefined);
        }
        Ok(self.num.eval(lambda) / den)
    }

    /// True when λ₀ is a pole.
    pub fn has_pole_at(&self, lambda: &Rat) -> bool {
        self.den.eval(lambda).is_zero()
    }

    /// Floating evaluation at a complex base point (`None` at a pole within
    /// floating tolerance of zero denominator).
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        let den = self.den.eval_complex(z);
        if den.norm() == 0.0 {
            return None;
        }
        Some(self.num.eval_complex(z) / den)
    }

    pub fn recip(&self) -> Result<RationalFunction> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn derivative(&self) -> RationalFunction {
        let num = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        let den = &self.den * &self.den;
        RationalFunction::new(num, den).expect("denominator square is nonzero")
    }

    /// deg written as max(deg num, deg den) with the zero function at 0; this
    /// is the height of the induced map to ℙ¹ in the function-field metric.
    pub fn map_degree(&self) -> usize {
        self.num
            .degree_or_zero()
            .max(self.den.degree_or_zero())
    }

    pub fn pow(&self, k: u32) -> RationalFunction {
        RationalFunction {
            num: self.num.pow(k),
            den: self.den.pow(k),
        }
    }

    /// Multiply by a rational scalar (keeps the denominator monic).
    pub fn scale_rat(&self, c: &Rat) -> RationalFunction {
        if c.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        RationalFunction::new(num, den).expect("product of nonzero denominators")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        RationalFunction::new(num, den).expect("product of nonzero denominators")
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &self.num * &rhs.num;
        let den = &self.den * &rhs.den;
        RationalFunction::new(num, den).expect("product of nonzero denominators")
    }
}

impl Div for &RationalFunction {
    type Output = RationalFunction;
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &self.num * &rhs.den;
        let den = &self.den * &rhs.num;
        RationalFunction::new(num, den).expect("caller checked nonzero divisor")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned_binop_rf {
    ($trait:ident, $method:ident) => {
        impl $trait for RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: &RationalFunction) -> RationalFunction {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned_binop_rf!(Add, add);
forward_owned_binop_rf!(Sub, sub);
forward_owned_binop_rf!(Mul, mul);
forward_owned_binop_rf!(Div, div);

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num.to_string_var("λ"))
        } else {
            write!(
                f,
                "({}) / ({})",
                self.num.to_string_var("λ"),
                self.den.to_string_var("λ")
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::rat;

    fn pi64(coeffs: &[i64]) -> Polynomial {
        Polynomial::from_i64(coeffs)
    }

    #[test]
    fn normalization_cancels_and_makes_monic() {
        // (2λ² − 2)/(4λ − 4) = (λ + 1)/2
        let f = RationalFunction::new(pi64(&[-2, 0, 2]), pi64(&[-4, 4])).unwrap();
        assert_eq!(f.numerator(), &pi64(&[1, 1]).scale(&rat(1, 2)));
        assert_eq!(f.denominator(), &Polynomial::one());
        assert!(f.denominator().leading().is_one());
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let err = RationalFunction::new(pi64(&[1]), Polynomial::zero()).unwrap_err();
        assert_eq!(err.to_string(), "division by zero polynomial");
    }

    #[test]
    fn field_identities() {
        let f = RationalFunction::new(pi64(&[1, 2]), pi64(&[-1, 0, 1])).unwrap();
        let g = RationalFunction::new(pi64(&[0, 0, 3]), pi64(&[5, 1])).unwrap();
        let sum = &f + &g;
        assert_eq!(&sum - &g, f);
        let prod = &f * &g;
        assert_eq!(&prod / &g, f);
        assert_eq!(&f * &f.recip().unwrap(), RationalFunction::one());
    }

    #[test]
    fn eval_reports_section_pole() {
        let f = RationalFunction::new(pi64(&[1]), pi64(&[-3, 1])).unwrap();
        assert_eq!(f.eval(&rat(4, 1)).unwrap(), rat(1, 1));
        let err = f.eval(&rat(3, 1)).unwrap_err();
        assert_eq!(err.to_string(), "section undefined here");
        assert!(f.has_pole_at(&rat(3, 1)));
    }

    #[test]
    fn map_degree_reads_max_degree() {
        let f = RationalFunction::new(pi64(&[1, 0, 0, 2]), pi64(&[0, 1])).unwrap();
        assert_eq!(f.map_degree(), 3);
        assert_eq!(RationalFunction::zero().map_degree(), 0);
    }

    #[test]
    fn serde_rejects_zero_denominator() {
        let ok: RationalFunction =
            serde_json::from_str(r#"{"num":["1/1","1/1"],"den":["0/1","1/1"]}"#).unwrap();
        assert_eq!(ok, RationalFunction::new(pi64(&[1, 1]), pi64(&[0, 1])).unwrap());
        let bad = serde_json::from_str::<RationalFunction>(r#"{"num":["1/1"],"den":[]}"#);
        assert!(bad.is_err());
    }
}
