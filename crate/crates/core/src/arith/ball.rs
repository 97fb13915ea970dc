//! Complex ball arithmetic: a double-precision center plus an error radius.
//!
//! Radii propagate pessimistically — every operation adds a rounding slack of
//! a few ulps of the result on top of the exact interval bound — so a chain
//! of operations started on balls containing the true inputs always ends on a
//! ball containing the true output.  Division by a ball containing zero and
//! square roots straddling the branch cut are refused rather than silently
//! widened.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Closed disc `{ z : |z − center| ≤ radius }` in ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBall {
    pub center: Complex64,
    pub radius: f64,
}

/// Shorthand complex constructor used throughout the numeric layers.
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A few ulps of magnitude `m`, the per-operation rounding slack.
fn ulp_slack(m: f64) -> f64 {
    (m.abs() + f64::MIN_POSITIVE) * (4.0 * f64::EPSILON)
}

impl ComplexBall {
    pub fn new(center: Complex64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0, "ball radius must be nonnegative");
        ComplexBall { center, radius }
    }

    /// A ball of radius zero: the center is taken as exact.
    pub fn exact(center: Complex64) -> Self {
        ComplexBall {
            center,
            radius: 0.0,
        }
    }

    pub fn zero() -> Self {
        ComplexBall::exact(cplx(0.0, 0.0))
    }

    /// Upper bound for |z| over the ball.
    pub fn mag_upper(&self) -> f64 {
        self.center.norm() + self.radius
    }

    /// Lower bound for |z| over the ball (clamped at zero).
    pub fn mag_lower(&self) -> f64 {
        (self.center.norm() - self.radius).max(0.0)
    }

    pub fn contains_zero(&self) -> bool {
        self.center.norm() <= self.radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius + ulp_slack(self.mag_upper())
    }

    /// Enlarge the radius (used to absorb external error estimates).
    pub fn widen(&self, extra: f64) -> Self {
        ComplexBall::new(self.center, self.radius + extra.abs())
    }

    pub fn neg(&self) -> Self {
        ComplexBall::new(-self.center, self.radius)
    }

    pub fn add(&self, o: &ComplexBall) -> Self {
        let center = self.center + o.center;
        let radius = self.radius + o.radius + ulp_slack(center.norm());
        ComplexBall::new(center, radius)
    }

    pub fn sub(&self, o: &ComplexBall) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ComplexBall) -> Self {
        let center = self.center * o.center;
        let radius = self.center.norm() * o.radius
            + o.center.norm() * self.radius
            + self.radius * o.radius
            + ulp_slack(center.norm());
        ComplexBall::new(center, radius)
    }

    /// Multiply by an exact complex scalar.
    pub fn scale(&self, s: Complex64) -> Self {
        let center = self.center * s;
        ComplexBall::new(center, self.radius * s.norm() + ulp_slack(center.norm()))
    }

    pub fn div(&self, o: &ComplexBall) -> Result<Self> {
        if o.contains_zero() {
            return Err(CoreError::IndeterminateDivision);
        }
        let center = self.center / o.center;
        let dn = o.center.norm();
        // |z1/z2 − c1/c2| ≤ (|c1| r2 + |c2| r1 + r1 r2) / (|c2| (|c2| − r2)).
        let radius = (self.center.norm() * o.radius + dn * self.radius + self.radius * o.radius)
            / (dn * (dn - o.radius))
            + ulp_slack(center.norm());
        Ok(ComplexBall::new(center, radius))
    }

    /// Square root on the branch whose value lies closer to `hint`.  The
    /// caller owns branch selection; a ball containing zero cannot commit to
    /// a branch and is rejected.
    pub fn sqrt_toward(&self, hint: Complex64) -> Result<Self> {
        if self.contains_zero() {
            return Err(CoreError::InsufficientPrecision(
                "square-root ball straddles the branch point".to_string(),
            ));
        }
        let mut root = self.center.sqrt();
        if (root - hint).norm() > (-root - hint).norm() {
            root = -root;
        }
        // 0 ∉ ball ⇒ arguments across the ball differ by < π, so same-branch
        // roots differ in argument by < π/2 and |√z + √c| ≥ cos(π/4)·(|√z| + |√c|).
        let low = self.mag_lower().sqrt();
        let denom = std::f64::consts::FRAC_1_SQRT_2 * (low + self.center.norm().sqrt());
        let radius = self.radius / denom + ulp_slack(root.norm());
        Ok(ComplexBall::new(root, radius))
    }

    /// Principal square root with caller-independent branch.
    pub fn sqrt_principal(&self) -> Result<Self> {
        let hint = self.center.sqrt();
        self.sqrt_toward(hint)
    }

    /// Smallest ball containing both inputs.
    pub fn union(&self, o: &ComplexBall) -> Self {
        let d = (self.center - o.center).norm();
        if d + o.radius <= self.radius {
            return *self;
        }
        if d + self.radius <= o.radius {
            return *o;
        }
        // Center on the segment between the two centers.
        let total = d + self.radius + o.radius;
        let r = total / 2.0;
        let t = (r - self.radius) / d;
        let center = self.center + (o.center - self.center) * t;
        ComplexBall::new(center, r + ulp_slack(r))
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.12e} + {:.12e}i) ± {:.3e}",
            self.center.re, self.center.im, self.radius
        )
    }
}
