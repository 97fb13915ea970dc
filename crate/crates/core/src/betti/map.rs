//! The Betti map: fiberwise normalized period coordinates of a section,
//! with Jacobian and rank diagnostics.
//!
//! Over a fiber with period basis (ω₁, ω₂), a point with elliptic
//! logarithm z has Betti coordinates (α, β) ∈ [0,1)² where
//! z ≡ α·ω₁ + β·ω₂ (mod Λ).  The coordinates depend on the frame: a
//! change of basis by an integer matrix M acts on (α, β) by (Mᵀ)⁻¹, so
//! all rank and transversality diagnostics below are frame-independent.

use num_complex::Complex64;

use crate::arith::ball::ComplexBall;
use crate::betti::agm::PeriodBasis;
use crate::betti::cpoint::{CPoint, CurveC};
use crate::betti::frame::{continue_basis, frame_at, guard_good_fiber};
use crate::betti::log::elliptic_log;
use crate::error::{CoreError, Result};
use crate::family::{FamilyPoint, WeierstrassFamily};

/// Betti coordinates wrapped into [0,1)², with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BettiPoint {
    pub coords: [f64; 2],
    pub error: f64,
}

/// Rank diagnosis of the Betti map of a section at one base point.
#[derive(Debug, Clone, Copy)]
pub struct DegeneracyReport {
    /// Rank of the 2×2 real Jacobian: 2 means the Betti image is locally
    /// open, 0 covers torsion sections (constant Betti coordinates).
    pub rank: u8,
    /// Singular values σ₁ ≥ σ₂ of the Jacobian.
    pub singular_values: [f64; 2],
    /// Jacobian of (Re λ, Im λ) ↦ (α, β) at the base point.
    pub jacobian: [[f64; 2]; 2],
    /// Central-difference step used.
    pub step: f64,
}

/// Wrapped coordinates of an elliptic-logarithm ball in a period basis.
pub fn betti_coords(basis: &PeriodBasis, z: &ComplexBall) -> Result<BettiPoint> {
    let (alpha, beta) = basis.coords(z.center);
    let error = z.radius * basis.solve_conditioning();
    if error >= 0.5 {
        return Err(CoreError::InsufficientPrecision(format!(
            "Betti coordinate error {error:.3e} swallows the unit cell"
        )));
    }
    Ok(BettiPoint {
        coords: [alpha.rem_euclid(1.0), beta.rem_euclid(1.0)],
        error,
    })
}

/// Distance between wrapped coordinate pairs on the torus (sup-norm).
pub fn wrapped_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        let d = (a[i] - b[i]).rem_euclid(1.0);
        worst = worst.max(d.min(1.0 - d));
    }
    worst
}

/// The fiber over a complex base point as a numeric curve.
pub fn fiber_curve(family: &WeierstrassFamily, lambda: Complex64) -> Result<CurveC> {
    guard_good_fiber(family, lambda)?;
    let (a4, a6) = family.coeffs_complex(lambda)?;
    Ok(CurveC::new(a4, a6))
}

/// Evaluate a section (or the zero section) at a complex base point.
/// A pole of the coordinates means the section passes through the zero
/// section there.
pub fn section_at_complex(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    lambda: Complex64,
) -> Result<CPoint> {
    if section.is_zero() {
        return Ok(CPoint::Infinity);
    }
    let Some((x, y)) = section.section_coords() else {
        return Err(CoreError::domain(
            "complex evaluation needs a section or the zero section",
        ));
    };
    let (xv, yv) = match (x.eval_complex(lambda), y.eval_complex(lambda)) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => (a, b),
        _ => return Ok(CPoint::Infinity),
    };
    let curve = fiber_curve(family, lambda)?;
    let res = curve.residual(xv, yv);
    if res > 1e-8 {
        return Err(CoreError::NotOnCurve(format!(
            "section evaluates {res:.3e} off the fiber at λ = {lambda}"
        )));
    }
    Ok(CPoint::Affine { x: xv, y: yv })
}

/// Unwrapped Betti coordinates of a section at λ in a caller-supplied
/// frame, plus the coordinate error bound.
fn raw_betti(
    family: &WeierstrassFamily,
    basis: &PeriodBasis,
    section: &FamilyPoint,
    lambda: Complex64,
) -> Result<(f64, f64, f64)> {
    let curve = fiber_curve(family, lambda)?;
    let p = section_at_complex(family, section, lambda)?;
    let z = elliptic_log(&curve, &p)?;
    let (alpha, beta) = basis.coords(z.center);
    Ok((alpha, beta, z.radius * basis.solve_conditioning()))
}

/// Betti coordinates of a section at λ in the given frame.
pub fn betti_of_section(
    family: &WeierstrassFamily,
    basis: &PeriodBasis,
    section: &FamilyPoint,
    lambda: Complex64,
) -> Result<BettiPoint> {
    let (alpha, beta, error) = raw_betti(family, basis, section, lambda)?;
    if error >= 0.5 {
        return Err(CoreError::InsufficientPrecision(format!(
            "Betti coordinate error {error:.3e} swallows the unit cell"
        )));
    }
    Ok(BettiPoint {
        coords: [alpha.rem_euclid(1.0), beta.rem_euclid(1.0)],
        error,
    })
}

/// Shift `v` by an integer so it lands next to `center`.
fn unwrap_near(center: f64, v: f64) -> f64 {
    v - (v - center).round()
}

/// Jacobian of (Re λ, Im λ) ↦ (α, β) for a section, by central differences
/// of step `h` in a caller-supplied frame at λ₀.  Returns the Jacobian and
/// an absolute noise bound on its entries.
pub fn betti_jacobian(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    lambda0: Complex64,
    h: f64,
    basis: &PeriodBasis,
) -> Result<([[f64; 2]; 2], f64)> {
    let (a0, b0, e0) = raw_betti(family, basis, section, lambda0)?;
    let mut vals = [[0.0f64; 2]; 4];
    let mut emax = e0;
    let offsets = [
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, h),
        Complex64::new(0.0, -h),
    ];
    for (k, dz) in offsets.iter().enumerate() {
        let lam = lambda0 + dz;
        let moved = continue_basis(family, basis, &[lambda0, lam])?;
        let (a, b, e) = raw_betti(family, &moved, section, lam)?;
        emax = emax.max(e);
        // Remove integer winding; the elliptic log itself is only defined
        // modulo the lattice, and its path may change class between
        // neighbouring evaluations.
        let (ua, ub) = (unwrap_near(a0, a), unwrap_near(b0, b));
        if (ua - a0).abs().max((ub - b0).abs()) <= 0.25 {
            vals[k] = [ua, ub];
            continue;
        }
        // Fallback: the point may have crossed to the opposite sign branch.
        let (fa, fb) = (unwrap_near(a0, -a), unwrap_near(b0, -b));
        if (fa - a0).abs().max((fb - b0).abs()) <= 0.25 {
            vals[k] = [fa, fb];
            continue;
        }
        return Err(CoreError::InsufficientPrecision(format!(
            "Betti coordinates jump across a step of {h:.1e} at λ = {lambda0}"
        )));
    }
    let j = [
        [
            (vals[0][0] - vals[1][0]) / (2.0 * h),
            (vals[2][0] - vals[3][0]) / (2.0 * h),
        ],
        [
            (vals[0][1] - vals[1][1]) / (2.0 * h),
            (vals[2][1] - vals[3][1]) / (2.0 * h),
        ],
    ];
    Ok((j, 3.0 * emax / h))
}

/// Singular values σ₁ ≥ σ₂ ≥ 0 of a 2×2 real matrix.
pub fn singular_values_2x2(j: &[[f64; 2]; 2]) -> (f64, f64) {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let c = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let t = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).max(0.0).sqrt();
    let hi = (0.5 * (t + disc)).max(0.0).sqrt();
    let lo = (0.5 * (t - disc)).max(0.0).sqrt();
    (hi, lo)
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn rank_from_singular_values(s1: f64, s2: f64, noise: f64) -> u8 {
    let floor = (50.0 * noise).max(1e-6);
    if s1 <= floor {
        0
    } else if s2 <= floor.max(1e-4 * s1) {
        1
    } else {
        2
    }
}

/// Rank of the Betti map of a section at λ₀, with an h vs h/2 stability
/// check on the decision.
pub fn degeneracy_rank(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    lambda0: Complex64,
) -> Result<DegeneracyReport> {
    let h = 1e-6 * lambda0.norm().max(1.0);
    let frame = frame_at(family, lambda0)?;
    let (j, noise) = betti_jacobian(family, section, lambda0, h, &frame.basis)?;
    let (s1, s2) = singular_values_2x2(&j);
    let rank = rank_from_singular_values(s1, s2, noise);

    let (j_half, noise_half) = betti_jacobian(family, section, lambda0, h / 2.0, &frame.basis)?;
    let (t1, t2) = singular_values_2x2(&j_half);
    let rank_half = rank_from_singular_values(t1, t2, noise_half);
    if rank != rank_half {
        return Err(CoreError::InsufficientPrecision(format!(
            "Betti rank unstable under step refinement ({rank} at h, {rank_half} at h/2)"
        )));
    }
    Ok(DegeneracyReport {
        rank,
        singular_values: [s1, s2],
        jacobian: j,
        step: h,
    })
}

/// det(n·J₁ − J₂) for two sections at λ₀: the leading Jacobian determinant
/// of the system `n·b(c₁) − b(c₂)`, whose zeros are the order-n relations
/// between the sections.  Computed in one shared frame, so the value is
/// well defined up to the sign of the frame.
pub fn transversality_delta0(
    family: &WeierstrassFamily,
    c1: &FamilyPoint,
    c2: &FamilyPoint,
    lambda0: Complex64,
    n: i64,
) -> Result<f64> {
    let h = 1e-6 * lambda0.norm().max(1.0);
    let frame = frame_at(family, lambda0)?;
    let (j1, _) = betti_jacobian(family, c1, lambda0, h, &frame.basis)?;
    let (j2, _) = betti_jacobian(family, c2, lambda0, h, &frame.basis)?;
    let m = [
        [
            n as f64 * j1[0][0] - j2[0][0],
            n as f64 * j1[0][1] - j2[0][1],
        ],
        [
            n as f64 * j1[1][0] - j2[1][0],
            n as f64 * j1[1][1] - j2[1][1],
        ],
    ];
    Ok(det2(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cplx;
    use crate::arith::poly::Polynomial;
    use crate::arith::ratfunc::RationalFunction;

    fn quartic_family_with_section() -> (WeierstrassFamily, FamilyPoint) {
        // The quartic pencil y² = x³ + λ⁴ − λ³ carries the small section
        // (λ, λ²), convenient for exercising the analytic layer.
        let a4 = Polynomial::zero();
        let a6 = Polynomial::from_i64(&[0, 0, 0, -1, 1]);
        let fam = WeierstrassFamily::from_polys("quartic", a4, a6).unwrap();
        let x = RationalFunction::from_poly(Polynomial::from_i64(&[0, 1]));
        let y = RationalFunction::from_poly(Polynomial::from_i64(&[0, 0, 1]));
        let sec = fam.section(x, y).unwrap();
        (fam, sec)
    }

    #[test]
    fn zero_section_maps_to_the_origin_with_rank_zero() {
        let (fam, _) = quartic_family_with_section();
        let lam = cplx(2.0, 0.6);
        let frame = frame_at(&fam, lam).unwrap();
        let b = betti_of_section(&fam, &frame.basis, &FamilyPoint::zero_section(), lam).unwrap();
        assert_eq!(b.coords, [0.0, 0.0]);
        assert_eq!(b.error, 0.0);
        let rep = degeneracy_rank(&fam, &FamilyPoint::zero_section(), lam).unwrap();
        assert_eq!(rep.rank, 0);
    }

    #[test]
    fn nontorsion_section_has_rank_two() {
        let (fam, sec) = quartic_family_with_section();
        let rep = degeneracy_rank(&fam, &sec, cplx(1.7, 0.4)).unwrap();
        assert_eq!(rep.rank, 2, "σ = {:?}", rep.singular_values);
        assert!(rep.singular_values[1] > 1e-4 * rep.singular_values[0]);
    }

    #[test]
    fn betti_coordinates_are_frame_covariant() {
        // Two frames at nearby anchor points describe the same fiber after
        // continuation; the wrapped coordinates must agree.
        let (fam, sec) = quartic_family_with_section();
        let lam = cplx(1.3, 0.8);
        let frame = frame_at(&fam, lam).unwrap();
        let b1 = betti_of_section(&fam, &frame.basis, &sec, lam).unwrap();
        // Continue out and back: same frame, same coordinates.
        let path = [lam, cplx(2.0, 1.1), cplx(2.4, 0.2), lam];
        let back = continue_basis(&fam, &frame.basis, &path).unwrap();
        let b2 = betti_of_section(&fam, &back, &sec, lam).unwrap();
        assert!(
            wrapped_distance(&b1.coords, &b2.coords) < 1e-8,
            "{:?} vs {:?}",
            b1.coords,
            b2.coords
        );
    }

    #[test]
    fn betti_map_is_a_fiberwise_homomorphism() {
        let (fam, sec) = quartic_family_with_section();
        let double = fam.multiply(&sec, 2).unwrap();
        let lam = cplx(1.9, 0.5);
        let frame = frame_at(&fam, lam).unwrap();
        let b1 = betti_of_section(&fam, &frame.basis, &sec, lam).unwrap();
        let b2 = betti_of_section(&fam, &frame.basis, &double, lam).unwrap();
        let doubled = [
            (2.0 * b1.coords[0]).rem_euclid(1.0),
            (2.0 * b1.coords[1]).rem_euclid(1.0),
        ];
        assert!(
            wrapped_distance(&doubled, &b2.coords) < 1e-7,
            "2·{:?} vs {:?}",
            b1.coords,
            b2.coords
        );
    }

    #[test]
    fn transversality_determinant_is_nonzero_for_independent_data() {
        let (fam, sec) = quartic_family_with_section();
        let zero = FamilyPoint::zero_section();
        // n·J(sec) − J(zero) = n·J(sec): nonzero for a rank-2 section.
        let d = transversality_delta0(&fam, &sec, &zero, cplx(1.7, 0.4), 3).unwrap();
        assert!(d.abs() > 1e-6, "delta0 = {d:.3e}");
    }

    #[test]
    fn singular_value_helper_matches_hand_values() {
        // diag(3, 1/2) rotated by swapping columns keeps σ = {3, 1/2}.
        let (s1, s2) = singular_values_2x2(&[[0.0, 3.0], [0.5, 0.0]]);
        assert!((s1 - 3.0).abs() < 1e-12 && (s2 - 0.5).abs() < 1e-12);
    }
}
