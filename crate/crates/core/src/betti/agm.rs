//! Period lattices of `y² = x³ + a₄x + a₆` by the complex
//! arithmetic–geometric mean.
//!
//! With the cubic split as (x − e₁)(x − e₂)(x − e₃) and the differential
//! dx/y, each root eᵢ yields the half-period ηᵢ = π / agm(√(eᵢ−eⱼ),
//! √(eᵢ−eₖ)); the lattice is generated by the doubled values 2ηᵢ, any two of
//! which form a basis and the third of which must land on ±basis ± basis.
//! That consistency check is run on every construction, so a wrong AGM
//! branch cannot produce a silently wrong lattice.  The returned basis is
//! Lagrange-reduced with Im(ω₂/ω₁) > 0.

use num_complex::Complex64;

use crate::arith::roots::cubic_roots;
use crate::error::{CoreError, Result};

/// An ordered, reduced basis of the period lattice, Im(ω₂/ω₁) > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodBasis {
    pub omega1: Complex64,
    pub omega2: Complex64,
}

impl PeriodBasis {
    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }

    /// Oriented area of the fundamental cell: Im(ω̄₁ ω₂).
    pub fn cell_area(&self) -> f64 {
        (self.omega1.conj() * self.omega2).im
    }

    /// Real coordinates (α, β) with z = α·ω₁ + β·ω₂.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let det = self.cell_area();
        let alpha = (z.re * self.omega2.im - z.im * self.omega2.re) / det;
        let beta = (z.im * self.omega1.re - z.re * self.omega1.im) / det;
        (alpha, beta)
    }

    /// Worst-case amplification of an absolute error in z when solving for
    /// the coordinates (row-sum bound on the inverse period matrix).
    pub fn solve_conditioning(&self) -> f64 {
        let det = self.cell_area().abs();
        let m = self.omega1.re.abs().max(self.omega1.im.abs());
        let n = self.omega2.re.abs().max(self.omega2.im.abs());
        2.0 * m.max(n) / det
    }

    /// Distance from z to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let (a, b) = self.coords(z);
        let r = z - self.omega1 * a.round() - self.omega2 * b.round();
        r.norm()
    }

    /// Express another basis in this one: columns are the coordinates of
    /// `other.omega1` and `other.omega2`.
    pub fn change_of_basis(&self, other: &PeriodBasis) -> [[f64; 2]; 2] {
        let (a, c) = self.coords(other.omega1);
        let (b, d) = self.coords(other.omega2);
        [[a, b], [c, d]]
    }

    fn reduce(&mut self) {
        for _ in 0..64 {
            if self.omega1.norm() > self.omega2.norm() {
                std::mem::swap(&mut self.omega1, &mut self.omega2);
            }
            let mu = ((self.omega2 * self.omega1.conj()).re / self.omega1.norm_sqr()).round();
            self.omega2 -= self.omega1 * mu;
            if mu == 0.0 && self.omega1.norm() <= self.omega2.norm() {
                break;
            }
        }
        if (self.omega1.conj() * self.omega2).im < 0.0 {
            self.omega2 = -self.omega2;
        }
    }
}

/// The optimal complex AGM: the square-root branch is chosen so that
/// |a′ − b′| ≤ |a′ + b′|, with ties broken toward Im(b′/a′) > 0.
pub fn complex_agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..80 {
        let am = (a + b) / 2.0;
        let mut gm = (a * b).sqrt();
        if (am - gm).norm() > (am + gm).norm() {
            gm = -gm;
        } else if ((am - gm).norm() - (am + gm).norm()).abs()
            < f64::EPSILON * (am.norm() + gm.norm())
            && (gm / am).im < 0.0
        {
            gm = -gm;
        }
        a = am;
        b = gm;
        if (a - b).norm() <= 4.0 * f64::EPSILON * a.norm() {
            break;
        }
    }
    (a + b) / 2.0
}

/// Half-periods (η₁, η₂, η₃) attached to the three roots of the cubic.
pub fn half_periods(a4: Complex64, a6: Complex64) -> Result<[Complex64; 3]> {
    let e = cubic_roots(a4, a6)?;
    let scale = 1.0 + e.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    for i in 0..3 {
        for j in (i + 1)..3 {
            // A double root is only located to ~√ε by any floating root
            // finder, so the collision threshold must sit well above that.
            if (e[i] - e[j]).norm() < 1e-6 * scale {
                return Err(CoreError::InsufficientPrecision(format!(
                    "cubic roots nearly collide ({:.3e} apart); fiber is too close to degenerate",
                    (e[i] - e[j]).norm()
                )));
            }
        }
    }
    let eta = |i: usize, j: usize, k: usize| -> Complex64 {
        let s1 = (e[i] - e[j]).sqrt();
        let s2 = (e[i] - e[k]).sqrt();
        Complex64::new(std::f64::consts::PI, 0.0) / complex_agm(s1, s2)
    };
    Ok([eta(0, 1, 2), eta(1, 0, 2), eta(2, 0, 1)])
}

/// Basis of the integer row lattice spanned by the given rows (Hermite-style
/// column elimination).  `None` when the rows do not span rank 2.
fn integer_lattice_basis(mut rows: Vec<[i64; 2]>) -> Option<[[i64; 2]; 2]> {
    loop {
        let mut piv: Option<usize> = None;
        for (i, r) in rows.iter().enumerate() {
            if r[0] != 0 && piv.is_none_or(|p| rows[p][0].abs() > r[0].abs()) {
                piv = Some(i);
            }
        }
        rows.swap(0, piv?);
        let mut eliminated = true;
        for i in 1..rows.len() {
            if rows[i][0] != 0 {
                let k = rows[i][0].div_euclid(rows[0][0]);
                rows[i][0] -= k * rows[0][0];
                rows[i][1] -= k * rows[0][1];
                if rows[i][0] != 0 {
                    eliminated = false;
                }
            }
        }
        if eliminated {
            break;
        }
    }
    let mut g = 0i64;
    for r in rows.iter().skip(1) {
        let (mut a, mut b) = (g, r[1].abs());
        while b != 0 {
            (a, b) = (b, a % b);
        }
        g = a;
    }
    if g == 0 {
        return None;
    }
    Some([rows[0], [0, g]])
}

/// σ₃(n), the sum of cubes of divisors.
fn divisor_cubes(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum()
}

/// The modular j-function from the q-expansion, j = E₄³/Δ (τ in the upper
/// half-plane; after lattice reduction |q| is far below 1, so a short
/// product/series reaches full double precision).
pub fn j_from_tau(tau: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau).exp();
    let one = Complex64::new(1.0, 0.0);
    let mut e4 = one;
    let mut prod = one;
    let mut qn = one;
    for n in 1..=80u64 {
        qn *= q;
        if qn.norm() < 1e-22 {
            break;
        }
        e4 += qn * (240.0 * divisor_cubes(n) as f64);
        prod *= (one - qn).powi(24);
    }
    e4 * e4 * e4 / (q * prod)
}

/// Build and validate a reduced period basis for the fiber.
///
/// Each of the three AGM values `2η_i` is a genuine period, but an
/// arbitrary pair of them may generate only a finite-index sublattice (the
/// AGM of an incoherently ordered root pair can return a non-primitive
/// period).  The basis is therefore built from *all three* generators by
/// integer row reduction, and the result is cross-checked against an
/// independent oracle: the modular j-function of τ must reproduce the
/// algebraic j-invariant of the coefficients.
pub fn period_basis(a4: Complex64, a6: Complex64) -> Result<PeriodBasis> {
    let etas = half_periods(a4, a6)?;
    let periods: Vec<Complex64> = etas.iter().map(|h| h * 2.0).collect();

    // Pick the pair with the largest angle between them (best conditioned).
    let mut best = (0usize, 1usize, -1.0f64);
    for i in 0..3 {
        for j in (i + 1)..3 {
            let sin = (periods[i].conj() * periods[j]).im.abs()
                / (periods[i].norm() * periods[j].norm());
            if sin > best.2 {
                best = (i, j, sin);
            }
        }
    }
    let (i, j, sin) = best;
    if !(sin > 1e-6) {
        return Err(CoreError::InsufficientPrecision(
            "all candidate periods are nearly collinear".to_string(),
        ));
    }
    let mut basis = PeriodBasis {
        omega1: periods[i],
        omega2: periods[j],
    };

    // Fold in the remaining period: its coordinates in the pair are
    // rational with a small denominator; a denominator > 1 means the pair
    // spans a proper sublattice and the basis must be enlarged.
    let k = 3 - i - j;
    let (alpha, beta) = basis.coords(periods[k]);
    let mut denom = 0i64;
    for q in 1..=6i64 {
        let (qa, qb) = (alpha * q as f64, beta * q as f64);
        if (qa - qa.round()).abs() < 1e-6 * q as f64 && (qb - qb.round()).abs() < 1e-6 * q as f64
        {
            denom = q;
            break;
        }
    }
    if denom == 0 {
        return Err(CoreError::InsufficientPrecision(format!(
            "period triple is inconsistent: third period has coordinates ({alpha:.9}, {beta:.9})"
        )));
    }
    if denom > 1 {
        let rows = vec![
            [denom, 0],
            [0, denom],
            [
                (alpha * denom as f64).round() as i64,
                (beta * denom as f64).round() as i64,
            ],
        ];
        let b = integer_lattice_basis(rows).ok_or_else(|| {
            CoreError::InsufficientPrecision("degenerate period triple".to_string())
        })?;
        let (w1, w2) = (basis.omega1, basis.omega2);
        let s = 1.0 / denom as f64;
        basis = PeriodBasis {
            omega1: (w1 * b[0][0] as f64 + w2 * b[0][1] as f64) * s,
            omega2: (w1 * b[1][0] as f64 + w2 * b[1][1] as f64) * s,
        };
    }

    // Every candidate period must now be an integer lattice vector.
    let scale = periods.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
    for p in &periods {
        let (a, b) = basis.coords(*p);
        let res = *p - basis.omega1 * a.round() - basis.omega2 * b.round();
        if (a - a.round()).abs() > 1e-6 || (b - b.round()).abs() > 1e-6 || res.norm() > 1e-8 * scale
        {
            return Err(CoreError::InsufficientPrecision(format!(
                "period triple is inconsistent after enlargement: coordinates ({a:.9}, {b:.9})"
            )));
        }
    }
    basis.reduce();

    // Independent cross-check: the modular j of τ against the algebraic j.
    let j_mod = j_from_tau(basis.tau());
    let d = a4 * a4 * a4 * 4.0 + a6 * a6 * 27.0;
    let j_alg = a4 * a4 * a4 * 6912.0 / d;
    if !j_mod.is_finite() || (j_mod - j_alg).norm() > 1e-6 * (j_alg.norm() + 2000.0) {
        return Err(CoreError::InsufficientPrecision(format!(
            "lattice fails the j-invariant cross-check: modular {j_mod} vs algebraic {j_alg}"
        )));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cplx;

    const LEMNISCATE: f64 = 2.622_057_554_292_119_8;

    #[test]
    fn modular_j_matches_classical_values() {
        // j(i) = 1728 and j(ρ) = 0 for ρ = e^{2πi/3}.
        assert!((j_from_tau(cplx(0.0, 1.0)) - cplx(1728.0, 0.0)).norm() < 1e-8);
        assert!(j_from_tau(cplx(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-8);
    }

    #[test]
    fn sublattice_period_pairs_are_enlarged_to_the_full_lattice() {
        // Cubic with roots {0, 1, 3.4} (depressed): here the best-angled
        // AGM pair spans only an index-3 sublattice, so the third period
        // carries coordinates with denominator 3 and the basis has to be
        // enlarged.  The internal j-invariant oracle certifies the result.
        let m = (0.0 + 1.0 + 3.4) / 3.0;
        let (e0, e1, e2) = (0.0 - m, 1.0 - m, 3.4 - m);
        let a4 = cplx(e0 * e1 + e0 * e2 + e1 * e2, 0.0);
        let a6 = cplx(-e0 * e1 * e2, 0.0);
        let basis = period_basis(a4, a6).unwrap();
        for eta in half_periods(a4, a6).unwrap() {
            let d = basis.distance_to_lattice(eta * 2.0);
            assert!(d < 1e-9 * eta.norm(), "2η is {d:.3e} off the lattice");
        }
    }

    #[test]
    fn real_agm_matches_gauss() {
        // agm(1, √2) = π / ϖ (Gauss's constant relation).
        let m = complex_agm(cplx(1.0, 0.0), cplx(2.0f64.sqrt(), 0.0));
        assert!((m.re - std::f64::consts::PI / LEMNISCATE).abs() < 1e-14);
        assert!(m.im.abs() < 1e-15);
    }

    #[test]
    fn lemniscatic_lattice_is_square() {
        // y² = x³ − x: square CM lattice with real period 2ϖ.
        let basis = period_basis(cplx(-1.0, 0.0), cplx(0.0, 0.0)).unwrap();
        let tau = basis.tau();
        assert!((tau - cplx(0.0, 1.0)).norm() < 1e-12, "tau = {tau}");
        assert!((basis.omega1.norm() - 2.0 * LEMNISCATE).abs() < 1e-10);
        assert!(basis.cell_area() > 0.0);
    }

    #[test]
    fn coordinates_invert_the_basis() {
        let basis = period_basis(cplx(-1.0, 0.25), cplx(0.5, -0.75)).unwrap();
        let z = basis.omega1 * 0.3 - basis.omega2 * 1.7;
        let (a, b) = basis.coords(z);
        assert!((a - 0.3).abs() < 1e-10 && (b + 1.7).abs() < 1e-10);
        assert!(basis.distance_to_lattice(basis.omega1 * 3.0 + basis.omega2 * 2.0) < 1e-9);
    }

    #[test]
    fn degenerate_cubic_is_rejected() {
        // x³ − 3x + 2 = (x − 1)²(x + 2): double root.
        let err = period_basis(cplx(-3.0, 0.0), cplx(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, CoreError::InsufficientPrecision(_)));
    }

    #[test]
    fn real_coefficients_give_conjugation_stable_lattice() {
        // Schwarz reflection: for real a₄, a₆ the lattice is stable under
        // conjugation, so the reduced τ sits on the boundary of the
        // fundamental domain — Re τ ∈ {0, ±½} or on the arc |τ| = 1.
        for (a4, a6) in [(-2.0, 0.5), (1.0, 1.0), (-1.0, 0.3), (2.5, -4.0)] {
            let basis = period_basis(cplx(a4, 0.0), cplx(a6, 0.0)).unwrap();
            let tau = basis.tau();
            let re = tau.re.abs();
            assert!(
                re < 1e-9 || (re - 0.5).abs() < 1e-9 || (tau.norm() - 1.0).abs() < 1e-9,
                "tau = {tau} for ({a4}, {a6})"
            );
        }
    }

    #[test]
    fn random_fibers_pass_the_triple_consistency_check() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..200 {
            let a4 = cplx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let a6 = cplx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            match period_basis(a4, a6) {
                Ok(basis) => {
                    checked += 1;
                    let tau = basis.tau();
                    assert!(tau.im > 0.0);
                    // Reduced basis: |Re τ| ≤ ½ + slack, |τ| ≥ 1 − slack.
                    assert!(tau.re.abs() <= 0.5 + 1e-9);
                    assert!(tau.norm() >= 1.0 - 1e-9);
                }
                Err(CoreError::InsufficientPrecision(_)) => {} // near-degenerate draw
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(checked > 150, "only {checked} fibers validated");
    }
}
