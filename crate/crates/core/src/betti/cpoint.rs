//! Points on a complex fiber `y² = x³ + a₄x + a₆` with the numeric
//! chord–tangent group law.
//!
//! This is floating-point geometry for driving and validating the analytic
//! layer (logarithms, Betti coordinates); exact arithmetic lives with the
//! rational sections.  Near-cancellation cases (adding a point to its own
//! negative, doubling 2-torsion) are resolved by relative thresholds, and
//! every constructor checks the curve equation to a relative tolerance.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};

/// A projective point on a complex Weierstrass fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CPoint {
    Infinity,
    Affine { x: Complex64, y: Complex64 },
}

impl CPoint {
    pub fn affine(x: Complex64, y: Complex64) -> Self {
        CPoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CPoint::Infinity)
    }

    pub fn x(&self) -> Option<Complex64> {
        match self {
            CPoint::Infinity => None,
            CPoint::Affine { x, .. } => Some(*x),
        }
    }

    pub fn y(&self) -> Option<Complex64> {
        match self {
            CPoint::Infinity => None,
            CPoint::Affine { y, .. } => Some(*y),
        }
    }
}

/// A complex Weierstrass fiber with numeric group operations.
#[derive(Debug, Clone, Copy)]
pub struct CurveC {
    pub a4: Complex64,
    pub a6: Complex64,
}

impl CurveC {
    pub fn new(a4: Complex64, a6: Complex64) -> Self {
        CurveC { a4, a6 }
    }

    /// Right-hand side f(x) = x³ + a₄x + a₆.
    pub fn f(&self, x: Complex64) -> Complex64 {
        (x * x + self.a4) * x + self.a6
    }

    fn scale_at(&self, x: Complex64) -> f64 {
        let ax = x.norm().max(1.0);
        (ax * ax * ax + self.a4.norm() * ax + self.a6.norm()).max(1.0)
    }

    /// Relative residual of the curve equation at (x, y).
    pub fn residual(&self, x: Complex64, y: Complex64) -> f64 {
        (y * y - self.f(x)).norm() / self.scale_at(x)
    }

    /// Validated affine point.
    pub fn point(&self, x: Complex64, y: Complex64) -> Result<CPoint> {
        let res = self.residual(x, y);
        if res > 1e-8 {
            return Err(CoreError::NotOnCurve(format!(
                "residual {res:.3e} at x = {x}"
            )));
        }
        Ok(CPoint::Affine { x, y })
    }

    /// Lift an x-coordinate to the fiber, steering the square root toward
    /// `hint` when given (used to track a continuously varying branch).
    pub fn lift_x(&self, x: Complex64, hint: Option<Complex64>) -> CPoint {
        let mut y = self.f(x).sqrt();
        if let Some(h) = hint {
            if (y + h).norm() < (y - h).norm() {
                y = -y;
            }
        }
        CPoint::Affine { x, y }
    }

    pub fn negate(&self, p: &CPoint) -> CPoint {
        match p {
            CPoint::Infinity => CPoint::Infinity,
            CPoint::Affine { x, y } => CPoint::Affine { x: *x, y: -*y },
        }
    }

    /// Chord–tangent addition.
    pub fn add(&self, p: &CPoint, q: &CPoint) -> CPoint {
        let (x1, y1) = match p {
            CPoint::Infinity => return *q,
            CPoint::Affine { x, y } => (*x, *y),
        };
        let (x2, y2) = match q {
            CPoint::Infinity => return *p,
            CPoint::Affine { x, y } => (*x, *y),
        };
        let xscale = x1.norm().max(x2.norm()).max(1.0);
        let yscale = y1.norm().max(y2.norm()).max(1.0);
        let slope = if (x1 - x2).norm() <= 1e-11 * xscale {
            if (y1 + y2).norm() <= 1e-11 * yscale {
                // q = −p (covers doubling 2-torsion, where y ≈ 0).
                return CPoint::Infinity;
            }
            // Tangent at a doubled point.
            (3.0 * x1 * x1 + self.a4) / (2.0 * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = slope * slope - x1 - x2;
        let y3 = slope * (x1 - x3) - y1;
        CPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &CPoint) -> CPoint {
        self.add(p, p)
    }

    /// [n]·p by double-and-add (n may be negative).
    pub fn multiply(&self, p: &CPoint, n: i64) -> CPoint {
        if n == 0 {
            return CPoint::Infinity;
        }
        let base = if n < 0 { self.negate(p) } else { *p };
        let mut k = n.unsigned_abs();
        let mut acc = CPoint::Infinity;
        let mut pow = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &pow);
            }
            k >>= 1;
            if k > 0 {
                pow = self.double(&pow);
            }
        }
        acc
    }

    /// A random affine point with x in the given box (for property tests).
    pub fn random_point<R: Rng>(&self, rng: &mut R, spread: f64) -> CPoint {
        let x = Complex64::new(
            rng.gen_range(-spread..spread),
            rng.gen_range(-spread..spread),
        );
        self.lift_x(x, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cplx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(p: &CPoint, q: &CPoint, tol: f64) -> bool {
        match (p, q) {
            (CPoint::Infinity, CPoint::Infinity) => true,
            (CPoint::Affine { x: x1, y: y1 }, CPoint::Affine { x: x2, y: y2 }) => {
                let s = x1.norm().max(y1.norm()).max(1.0);
                (x1 - x2).norm() <= tol * s && (y1 - y2).norm() <= tol * s
            }
            _ => false,
        }
    }

    #[test]
    fn group_axioms_hold_numerically() {
        let c = CurveC::new(cplx(-1.0, 0.4), cplx(0.7, -0.2));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = c.random_point(&mut rng, 2.0);
            let q = c.random_point(&mut rng, 2.0);
            let r = c.random_point(&mut rng, 2.0);
            // Commutativity and associativity.
            assert!(close(&c.add(&p, &q), &c.add(&q, &p), 1e-9));
            let lhs = c.add(&c.add(&p, &q), &r);
            let rhs = c.add(&p, &c.add(&q, &r));
            assert!(close(&lhs, &rhs, 1e-6), "assoc failed: {lhs:?} vs {rhs:?}");
            // Inverse.
            assert!(c.add(&p, &c.negate(&p)).is_infinity());
            // The sum stays on the curve.
            if let CPoint::Affine { x, y } = c.add(&p, &q) {
                assert!(c.residual(x, y) < 1e-8);
            }
        }
    }

    #[test]
    fn multiplication_matches_repeated_addition() {
        let c = CurveC::new(cplx(2.0, -1.0), cplx(-0.5, 0.9));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = c.random_point(&mut rng, 1.5);
        let mut acc = CPoint::Infinity;
        for n in 0..=9i64 {
            assert!(close(&c.multiply(&p, n), &acc, 1e-6), "n = {n}");
            acc = c.add(&acc, &p);
        }
        // Negative multiples.
        assert!(close(
            &c.multiply(&p, -7),
            &c.negate(&c.multiply(&p, 7)),
            1e-7
        ));
    }

    #[test]
    fn two_torsion_doubles_to_infinity() {
        // y² = x³ − x has 2-torsion at x ∈ {−1, 0, 1}.
        let c = CurveC::new(cplx(-1.0, 0.0), cplx(0.0, 0.0));
        for e in [-1.0, 0.0, 1.0] {
            let p = c.point(cplx(e, 0.0), cplx(0.0, 0.0)).unwrap();
            assert!(c.double(&p).is_infinity());
        }
    }

    #[test]
    fn off_curve_points_are_rejected() {
        let c = CurveC::new(cplx(-1.0, 0.0), cplx(0.0, 0.0));
        assert!(c.point(cplx(2.0, 0.0), cplx(1.0, 0.0)).is_err());
    }
}
