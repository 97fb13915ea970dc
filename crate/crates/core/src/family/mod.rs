//! One-parameter Weierstrass families `y² = x³ + a₄(λ)x + a₆(λ)` over an
//! open subset of the λ-line.
//!
//! The base S is the affine λ-line minus the vanishing locus of the
//! discriminant and the poles of the coefficients; the fiber at infinity is
//! always treated as outside S.  Coefficients live in ℚ(λ), so every fiber
//! over a rational base point specializes exactly.

mod divpoly;
mod point;
mod special;

pub use divpoly::{division_poly_x, torsion_x_coords};
pub use point::FamilyPoint;
pub use special::{
    is_generically_special, torsion_order_upto, IsotrivialityCertificate, DEFAULT_TORSION_BOUND,
};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::ball::ComplexBall;
use crate::arith::poly::Polynomial;
use crate::arith::rational::Rat;
use crate::arith::ratfunc::RationalFunction;
use crate::arith::roots::complex_roots;
use crate::error::{CoreError, Result};

/// The locus of bad fibers: zeros of the square-free polynomial `defining`
/// (discriminant numerator together with coefficient poles), plus the fiber
/// at infinity, which the base never includes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularLocus {
    pub defining: Polynomial,
    pub finite: Vec<ComplexBall>,
    pub includes_infinity: bool,
}

/// A family `y² = x³ + a₄(λ)x + a₆(λ)` with ℚ(λ) coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FamilySpec", into = "FamilySpec")]
pub struct WeierstrassFamily {
    label: String,
    a4: RationalFunction,
    a6: RationalFunction,
    discriminant: RationalFunction,
    singular: SingularLocus,
}

/// Wire format: either explicit coefficients or the Legendre shorthand.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FamilySpec {
    Legendre {
        legendre: bool,
    },
    Explicit {
        label: String,
        a4: RationalFunction,
        a6: RationalFunction,
    },
}

impl From<WeierstrassFamily> for FamilySpec {
    fn from(f: WeierstrassFamily) -> Self {
        if f.label == "legendre" {
            FamilySpec::Legendre { legendre: true }
        } else {
            FamilySpec::Explicit {
                label: f.label,
                a4: f.a4,
                a6: f.a6,
            }
        }
    }
}

impl TryFrom<FamilySpec> for WeierstrassFamily {
    type Error = CoreError;
    fn try_from(spec: FamilySpec) -> Result<Self> {
        match spec {
            FamilySpec::Legendre { legendre: true } => Ok(WeierstrassFamily::legendre()),
            FamilySpec::Legendre { legendre: false } => Err(CoreError::domain(
                "family spec: set legendre=true or give explicit coefficients".to_string(),
            )),
            FamilySpec::Explicit { label, a4, a6 } => WeierstrassFamily::new(label, a4, a6),
        }
    }
}

impl WeierstrassFamily {
    /// Validate the coefficients and precompute the singular locus.  A
    /// family whose discriminant vanishes identically has no smooth fibers
    /// at all and is rejected.
    pub fn new(
        label: impl Into<String>,
        a4: RationalFunction,
        a6: RationalFunction,
    ) -> Result<Self> {
        let label = label.into();
        // Δ = −16(4a₄³ + 27a₆²)
        let four_a4_cubed = a4.pow(3).scale_rat(&crate::arith::rational::rat(4, 1));
        let twenty7_a6_sq = a6.pow(2).scale_rat(&crate::arith::rational::rat(27, 1));
        let discriminant =
            (&four_a4_cubed + &twenty7_a6_sq).scale_rat(&crate::arith::rational::rat(-16, 1));
        if discriminant.is_zero() {
            return Err(CoreError::SingularFamily(format!(
                "family '{label}' has identically vanishing discriminant"
            )));
        }
        // Bad fibers: zeros of the discriminant numerator and poles of the
        // data (coefficient denominators and the discriminant denominator).
        let mut defining = discriminant.numerator().clone();
        for pole_source in [a4.denominator(), a6.denominator()] {
            if !pole_source.is_constant() {
                defining = &defining * pole_source;
            }
        }
        let defining = defining.square_free_part();
        let finite = if defining.is_constant() {
            Vec::new()
        } else {
            complex_roots(&defining)?
                .into_iter()
                .map(|(z, r)| ComplexBall::new(z, r))
                .collect()
        };
        Ok(WeierstrassFamily {
            label,
            a4,
            a6,
            discriminant,
            singular: SingularLocus {
                defining,
                finite,
                includes_infinity: true,
            },
        })
    }

    /// Convenience constructor for polynomial coefficients.
    pub fn from_polys(label: impl Into<String>, a4: Polynomial, a6: Polynomial) -> Result<Self> {
        WeierstrassFamily::new(
            label,
            RationalFunction::from_poly(a4),
            RationalFunction::from_poly(a6),
        )
    }

    /// The Legendre family `y² = x(x−1)(x−λ)` in depressed form:
    /// a₄ = (−λ² + λ − 1)/3, a₆ = (−2λ³ + 3λ² + 3λ − 2)/27.
    pub fn legendre() -> Self {
        let a4 = Polynomial::new(vec![
            crate::arith::rational::rat(-1, 3),
            crate::arith::rational::rat(1, 3),
            crate::arith::rational::rat(-1, 3),
        ]);
        let a6 = Polynomial::new(vec![
            crate::arith::rational::rat(-2, 27),
            crate::arith::rational::rat(3, 27),
            crate::arith::rational::rat(3, 27),
            crate::arith::rational::rat(-2, 27),
        ]);
        WeierstrassFamily::from_polys("legendre", a4, a6)
            .expect("the Legendre discriminant 16λ²(λ−1)² is not identically zero")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn a4(&self) -> &RationalFunction {
        &self.a4
    }

    pub fn a6(&self) -> &RationalFunction {
        &self.a6
    }

    /// Δ(λ) = −16(4a₄³ + 27a₆²) as an element of ℚ(λ).
    pub fn discriminant(&self) -> &RationalFunction {
        &self.discriminant
    }

    pub fn singular_values(&self) -> &SingularLocus {
        &self.singular
    }

    /// True when the fiber at rational λ₀ is defined and smooth.
    pub fn is_good_fiber(&self, lambda0: &Rat) -> bool {
        !self.singular.defining.eval(lambda0).is_zero()
    }

    /// Exact coefficients of the fiber at rational λ₀.
    pub fn coeffs_at(&self, lambda0: &Rat) -> Result<(Rat, Rat)> {
        if !self.is_good_fiber(lambda0) {
            return Err(CoreError::PointOutsideBase);
        }
        Ok((self.a4.eval(lambda0)?, self.a6.eval(lambda0)?))
    }

    /// Floating coefficients at a complex base point; fails on numeric poles.
    pub fn coeffs_complex(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match (self.a4.eval_complex(z), self.a6.eval_complex(z)) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Ok((a, b)),
            _ => Err(CoreError::domain(format!(
                "coefficients have a pole at λ = {z}"
            ))),
        }
    }

    /// Distance from a complex base point to the nearest singular fiber.
    pub fn distance_to_singular(&self, z: Complex64) -> f64 {
        self.singular
            .finite
            .iter()
            .map(|b| (z - b.center).norm() - b.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// j(λ) = 6912·a₄³ / (4a₄³ + 27a₆²).
    pub fn j_invariant(&self) -> RationalFunction {
        let num = self.a4.pow(3).scale_rat(&crate::arith::rational::rat(6912, 1));
        let den = &self
            .a4
            .pow(3)
            .scale_rat(&crate::arith::rational::rat(4, 1))
            + &self.a6.pow(2).scale_rat(&crate::arith::rational::rat(27, 1));
        &num / &den
    }

    /// Certificate recording whether j(λ) is constant.
    pub fn isotriviality(&self) -> IsotrivialityCertificate {
        let j = self.j_invariant();
        IsotrivialityCertificate {
            is_isotrivial: j.is_constant(),
            j_invariant: j,
        }
    }
}

impl PartialEq for WeierstrassFamily {
    fn eq(&self, other: &Self) -> bool {
        self.a4 == other.a4 && self.a6 == other.a6
    }
}
