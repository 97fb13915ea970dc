//! Points of the family: sections over ℚ(λ) and specialized fiber points.
//!
//! The chord–tangent group law is implemented twice over the two coefficient
//! fields (ℚ(λ) for sections, ℚ for fiber points); mixing the two contexts,
//! or two different fibers, is a caller error and is reported as such.

use std::fmt;

use num_traits::Zero;

use crate::arith::rational::Rat;
use crate::arith::ratfunc::RationalFunction;
use crate::error::{CoreError, Result};
use crate::family::WeierstrassFamily;

/// A point of the family: the zero section (generic or specialized), a
/// section with ℚ(λ) coordinates, or a rational point on one fiber.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyPoint {
    /// The zero of the group law; `fiber = None` is the generic zero section.
    Zero { fiber: Option<Rat> },
    /// A section λ ↦ (x(λ), y(λ)).
    Section {
        x: RationalFunction,
        y: RationalFunction,
    },
    /// A rational point on the fiber over λ₀.
    Fiber { lambda: Rat, x: Rat, y: Rat },
}

/// The evaluation context a point lives in.
#[derive(Debug, Clone, PartialEq)]
enum Context {
    Any,
    Generic,
    Fiber(Rat),
}

impl FamilyPoint {
    pub fn zero_section() -> Self {
        FamilyPoint::Zero { fiber: None }
    }

    pub fn zero_at(lambda: Rat) -> Self {
        FamilyPoint::Zero {
            fiber: Some(lambda),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FamilyPoint::Zero { .. })
    }

    /// λ₀ for points living on a single fiber.
    pub fn fiber(&self) -> Option<&Rat> {
        match self {
            FamilyPoint::Zero { fiber } => fiber.as_ref(),
            FamilyPoint::Section { .. } => None,
            FamilyPoint::Fiber { lambda, .. } => Some(lambda),
        }
    }

    fn context(&self) -> Context {
        match self {
            FamilyPoint::Zero { fiber: None } => Context::Any,
            FamilyPoint::Zero { fiber: Some(l) } => Context::Fiber(l.clone()),
            FamilyPoint::Section { .. } => Context::Generic,
            FamilyPoint::Fiber { lambda, .. } => Context::Fiber(lambda.clone()),
        }
    }

    /// x-coordinate of a specialized point (None for the fiber zero).
    pub fn fiber_x(&self) -> Option<&Rat> {
        match self {
            FamilyPoint::Fiber { x, .. } => Some(x),
            _ => None,
        }
    }

    /// Coordinates of a section (None for the zero section).
    pub fn section_coords(&self) -> Option<(&RationalFunction, &RationalFunction)> {
        match self {
            FamilyPoint::Section { x, y } => Some((x, y)),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyPoint::Zero { fiber: None } => write!(f, "O"),
            FamilyPoint::Zero { fiber: Some(l) } => write!(f, "O @ λ={l}"),
            FamilyPoint::Section { x, y } => write!(f, "({x}, {y})"),
            FamilyPoint::Fiber { lambda, x, y } => write!(f, "({x}, {y}) @ λ={lambda}"),
        }
    }
}

fn merge_contexts(p: &FamilyPoint, q: &FamilyPoint) -> Result<Context> {
    match (p.context(), q.context()) {
        (Context::Any, c) | (c, Context::Any) => Ok(c),
        (Context::Generic, Context::Generic) => Ok(Context::Generic),
        (Context::Fiber(a), Context::Fiber(b)) if a == b => Ok(Context::Fiber(a)),
        _ => Err(CoreError::MixedFiberContexts),
    }
}

impl WeierstrassFamily {
    /// Validate and build a section from ℚ(λ)-coordinates.
    pub fn section(&self, x: RationalFunction, y: RationalFunction) -> Result<FamilyPoint> {
        let rhs = &(&x.pow(3) + &(self.a4() * &x)) + self.a6();
        if &y * &y != rhs {
            return Err(CoreError::NotOnCurve(format!(
                "({x}, {y}) does not satisfy y² = x³ + a₄x + a₆ for family '{}'",
                self.label()
            )));
        }
        Ok(FamilyPoint::Section { x, y })
    }

    /// Validate and build a rational point on the fiber over λ₀.
    pub fn fiber_point(&self, lambda: Rat, x: Rat, y: Rat) -> Result<FamilyPoint> {
        let (a4, a6) = self.coeffs_at(&lambda)?;
        let rhs = &x * &x * &x + a4 * &x + a6;
        if &y * &y != rhs {
            return Err(CoreError::NotOnCurve(format!(
                "({x}, {y}) is not on the fiber of '{}' at λ = {lambda}",
                self.label()
            )));
        }
        Ok(FamilyPoint::Fiber { lambda, x, y })
    }

    /// Chord–tangent addition.  Inputs must share a fiber context.
    pub fn group_add(&self, p: &FamilyPoint, q: &FamilyPoint) -> Result<FamilyPoint> {
        let ctx = merge_contexts(p, q)?;
        if p.is_zero() {
            return Ok(reanchor(q.clone(), ctx));
        }
        if q.is_zero() {
            return Ok(reanchor(p.clone(), ctx));
        }
        match (p, q) {
            (FamilyPoint::Section { x: x1, y: y1 }, FamilyPoint::Section { x: x2, y: y2 }) => {
                Ok(self.add_generic(x1, y1, x2, y2))
            }
            (
                FamilyPoint::Fiber {
                    lambda,
                    x: x1,
                    y: y1,
                },
                FamilyPoint::Fiber { x: x2, y: y2, .. },
            ) => self.add_fiber(lambda, x1, y1, x2, y2),
            _ => Err(CoreError::MixedFiberContexts),
        }
    }

    fn add_generic(
        &self,
        x1: &RationalFunction,
        y1: &RationalFunction,
        x2: &RationalFunction,
        y2: &RationalFunction,
    ) -> FamilyPoint {
        let slope = if x1 != x2 {
            &(y2 - y1) / &(x2 - x1)
        } else if (y1 + y2).is_zero() {
            return FamilyPoint::zero_section();
        } else {
            // Tangent: (3x² + a₄) / (2y)
            let three_x_sq = (x1 * x1).scale_rat(&crate::arith::rational::rat(3, 1));
            let num = &three_x_sq + self.a4();
            let den = y1.scale_rat(&crate::arith::rational::rat(2, 1));
            &num / &den
        };
        let x3 = &(&(&slope * &slope) - x1) - x2;
        let y3 = &(&slope * &(x1 - &x3)) - y1;
        FamilyPoint::Section { x: x3, y: y3 }
    }

    fn add_fiber(
        &self,
        lambda: &Rat,
        x1: &Rat,
        y1: &Rat,
        x2: &Rat,
        y2: &Rat,
    ) -> Result<FamilyPoint> {
        let slope = if x1 != x2 {
            (y2 - y1) / (x2 - x1)
        } else if (y1 + y2).is_zero() {
            return Ok(FamilyPoint::zero_at(lambda.clone()));
        } else {
            let (a4, _) = self.coeffs_at(lambda)?;
            (Rat::from_integer(3.into()) * x1 * x1 + a4) / (Rat::from_integer(2.into()) * y1)
        };
        let x3 = &slope * &slope - x1 - x2;
        let y3 = slope * (x1 - &x3) - y1;
        Ok(FamilyPoint::Fiber {
            lambda: lambda.clone(),
            x: x3,
            y: y3,
        })
    }

    pub fn negate(&self, p: &FamilyPoint) -> FamilyPoint {
        match p {
            FamilyPoint::Zero { .. } => p.clone(),
            FamilyPoint::Section { x, y } => FamilyPoint::Section {
                x: x.clone(),
                y: -y,
            },
            FamilyPoint::Fiber { lambda, x, y } => FamilyPoint::Fiber {
                lambda: lambda.clone(),
                x: x.clone(),
                y: -y.clone(),
            },
        }
    }

    /// [n]·P by double-and-add; n may be negative.
    pub fn multiply(&self, p: &FamilyPoint, n: i64) -> Result<FamilyPoint> {
        if n == 0 {
            return Ok(match p.fiber() {
                Some(l) => FamilyPoint::zero_at(l.clone()),
                None => match p {
                    FamilyPoint::Section { .. } => FamilyPoint::zero_section(),
                    _ => FamilyPoint::zero_section(),
                },
            });
        }
        let base = if n < 0 { self.negate(p) } else { p.clone() };
        let mut n = n.unsigned_abs();
        let mut acc: Option<FamilyPoint> = None;
        let mut pow = base;
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => pow.clone(),
                    Some(a) => self.group_add(&a, &pow)?,
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            pow = self.group_add(&pow, &pow)?;
        }
        Ok(acc.expect("n ≠ 0 so at least one bit set"))
    }

    /// Evaluate a point at λ₀ ∈ S.  Sections with a pole at λ₀ are reported
    /// as undefined there; specializing an already specialized point is only
    /// the identity on its own fiber.
    pub fn specialize(&self, p: &FamilyPoint, lambda0: &Rat) -> Result<FamilyPoint> {
        if !self.is_good_fiber(lambda0) {
            return Err(CoreError::PointOutsideBase);
        }
        match p {
            FamilyPoint::Zero { fiber: None } => Ok(FamilyPoint::zero_at(lambda0.clone())),
            FamilyPoint::Zero { fiber: Some(l) } | FamilyPoint::Fiber { lambda: l, .. } => {
                if l == lambda0 {
                    Ok(p.clone())
                } else {
                    Err(CoreError::MixedFiberContexts)
                }
            }
            FamilyPoint::Section { x, y } => {
                let xv = x.eval(lambda0)?;
                let yv = y.eval(lambda0)?;
                Ok(FamilyPoint::Fiber {
                    lambda: lambda0.clone(),
                    x: xv,
                    y: yv,
                })
            }
        }
    }
}

/// Give a context-free zero the fiber anchor of the merged context.
fn reanchor(p: FamilyPoint, ctx: Context) -> FamilyPoint {
    match (&p, ctx) {
        (FamilyPoint::Zero { fiber: None }, Context::Fiber(l)) => FamilyPoint::zero_at(l),
        _ => p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::poly::Polynomial;
    use crate::arith::rational::rat;

    fn pivot() -> WeierstrassFamily {
        // y² = x³ − λx + λ with section (1, 1).
        WeierstrassFamily::from_polys(
            "pivot",
            Polynomial::from_i64(&[0, -1]),
            Polynomial::from_i64(&[0, 1]),
        )
        .unwrap()
    }

    fn pivot_section(fam: &WeierstrassFamily) -> FamilyPoint {
        fam.section(RationalFunction::one(), RationalFunction::one())
            .unwrap()
    }

    #[test]
    fn section_validation_rejects_off_curve_points() {
        let fam = pivot();
        assert!(pivot_section(&fam).is_zero() == false);
        let err = fam
            .section(RationalFunction::one(), RationalFunction::zero())
            .unwrap_err();
        assert!(matches!(err, CoreError::NotOnCurve(_)));
    }

    #[test]
    fn duplication_formula_on_a_section() {
        let fam = pivot();
        let p = pivot_section(&fam);
        let two_p = fam.multiply(&p, 2).unwrap();
        // x([2]P) = ((x²−a₄)² − 8a₆x)/(4y²) with x=y=1, a₄=−λ, a₆=λ:
        // ((1+λ)² − 8λ)/4 = (λ² − 6λ + 1)/4.
        let (x2, _) = two_p.section_coords().unwrap();
        let expected = RationalFunction::from_poly(Polynomial::new(vec![
            rat(1, 4),
            rat(-6, 4),
            rat(1, 4),
        ]));
        assert_eq!(x2, &expected);
    }

    #[test]
    fn specialization_commutes_with_addition() {
        let fam = pivot();
        let p = pivot_section(&fam);
        let lam = rat(3, 1);
        for n in 1..=6i64 {
            let np = fam.multiply(&p, n).unwrap();
            let lhs = fam.specialize(&np, &lam).unwrap();
            let p_lam = fam.specialize(&p, &lam).unwrap();
            let rhs = fam.multiply(&p_lam, n).unwrap();
            assert_eq!(lhs, rhs, "failed at n = {n}");
        }
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        let fam = pivot();
        let p = pivot_section(&fam);
        let q = fam.specialize(&p, &rat(3, 1)).unwrap();
        let err = fam.group_add(&p, &q).unwrap_err();
        assert_eq!(err.to_string(), "mixed fiber contexts");
        let r = fam.specialize(&p, &rat(5, 1)).unwrap();
        assert!(matches!(
            fam.group_add(&q, &r),
            Err(CoreError::MixedFiberContexts)
        ));
        // The generic zero is context-polymorphic.
        let z = FamilyPoint::zero_section();
        assert_eq!(fam.group_add(&z, &q).unwrap(), q);
    }

    #[test]
    fn inverse_and_two_torsion() {
        let fam = WeierstrassFamily::legendre();
        // (0,0) on y² = x(x−1)(x−λ) maps to x = −(1+λ)/3 in depressed form.
        let x = RationalFunction::from_poly(Polynomial::new(vec![rat(-1, 3), rat(-1, 3)]));
        let t = fam.section(x, RationalFunction::zero()).unwrap();
        let double = fam.multiply(&t, 2).unwrap();
        assert!(double.is_zero());
        let sum = fam.group_add(&t, &fam.negate(&t)).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn section_pole_reports_undefined() {
        // Family y² = x³ + x + λ² has section (−λ... keep simple: use a
        // section with denominator λ on the pivot family's quadratic twist.)
        let fam = pivot();
        let p = pivot_section(&fam);
        let three_p = fam.multiply(&p, 3).unwrap();
        let (x3, _) = three_p.section_coords().unwrap();
        // x([3]P) has poles at the roots of its denominator; find one
        // rational root if present, else check the λ = pole path artificially.
        assert!(x3.denominator().degree_or_zero() > 0);
        // Direct check of the error string on a manufactured pole:
        let f = RationalFunction::new(Polynomial::one(), Polynomial::from_i64(&[-3, 1])).unwrap();
        assert_eq!(
            f.eval(&rat(3, 1)).unwrap_err().to_string(),
            "section undefined here"
        );
    }

    #[test]
    fn multiply_matches_repeated_addition() {
        let fam = pivot();
        let p = pivot_section(&fam);
        let lam = rat(7, 2);
        let pf = fam.specialize(&p, &lam).unwrap();
        let mut acc = FamilyPoint::zero_at(lam.clone());
        for n in 1..=10i64 {
            acc = fam.group_add(&acc, &pf).unwrap();
            assert_eq!(fam.multiply(&pf, n).unwrap(), acc, "n = {n}");
        }
        // Negative multiples.
        assert_eq!(
            fam.multiply(&pf, -4).unwrap(),
            fam.negate(&fam.multiply(&pf, 4).unwrap())
        );
    }
}
