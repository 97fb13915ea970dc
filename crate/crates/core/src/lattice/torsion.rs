//! Counting torsion specializations of a section on a disc in the base.
//!
//! A fiber λ* has `[N]·P(λ*) = O` exactly when the Betti coordinates
//! satisfy `N·b(λ*) ∈ ℤ²`.  Over a disc U avoiding the singular locus the
//! frame is single-valued, so the count is the number of solutions of the
//! square system `ψ(λ) = N·b(λ) − q, q ∈ ℤ²` inside U.  The solver seeds
//! Newton iterations from a grid fine enough that no solution basin is
//! skipped (cell size tied to the Lipschitz constant `N·‖Db‖`), re-locks
//! the integer target `q = round(N·b)` on every iterate, and certifies
//! each hit by an independent re-evaluation in a freshly continued frame.
//!
//! For N = 1 the condition degenerates to "the section meets the zero
//! section", which happens exactly at the poles of its x-coordinate; those
//! are counted directly from the exact denominator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::roots::complex_roots;
use crate::betti::frame::{continue_basis, frame_at, guard_good_fiber};
use crate::betti::map::{betti_jacobian, betti_of_section, singular_values_2x2};
use crate::betti::PeriodBasis;
use crate::error::{CoreError, Result};
use crate::family::{FamilyPoint, WeierstrassFamily};

/// One certified torsion specialization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TorsionHit {
    pub lambda: Complex64,
    /// Betti profile: N·b(λ) ≈ q with q reduced mod N into [0, N)².
    pub q: [i64; 2],
    /// Sup-norm distance of N·b(λ) from ℤ² at the certified point.
    pub residual: f64,
}

/// Result of a torsion-specialization count on one disc.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorsionCountReport {
    pub n: i64,
    pub disc_center: Complex64,
    pub disc_radius: f64,
    pub count: usize,
    pub points: Vec<TorsionHit>,
    pub grid_per_axis: usize,
    pub warnings: Vec<String>,
}

/// Two hits closer than this are the same specialization.
const MERGE_RADIUS: f64 = 1e-6;
/// Certification threshold on the wrapped residual of N·b.
const HIT_TOL: f64 = 1e-7;

fn wrapped_miss(v: f64) -> f64 {
    let d = v.rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Continue the anchor frame from the disc center to λ (single-valued on
/// the disc since it avoids the singular locus).
fn frame_to(
    family: &WeierstrassFamily,
    anchor: &PeriodBasis,
    center: Complex64,
    lambda: Complex64,
) -> Result<PeriodBasis> {
    continue_basis(family, anchor, &[center, lambda])
}

/// Solve the 2×2 system j·d = rhs.
fn solve2(j: &[[f64; 2]; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det.abs() < 1e-14 {
        return None;
    }
    Some([
        (rhs[0] * j[1][1] - rhs[1] * j[0][1]) / det,
        (rhs[1] * j[0][0] - rhs[0] * j[1][0]) / det,
    ])
}

/// Count the fibers in the open disc where `[N]·section = O`.
pub fn torsion_specialization_count(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    center: Complex64,
    radius: f64,
    n: i64,
    grid_hint: usize,
) -> Result<TorsionCountReport> {
    if n < 1 {
        return Err(CoreError::domain("torsion order must be at least 1"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CoreError::domain("disc radius must be positive"));
    }
    // The whole disc must stay clear of the singular locus so that the
    // frame (and with it b) is single-valued on it.
    for ball in &family.singular_values().finite {
        let margin = (10.0 * ball.radius).max(1e-6 * (1.0 + ball.center.norm()));
        if (center - ball.center).norm() <= radius + margin {
            return Err(CoreError::TooCloseToDiscriminant);
        }
    }
    guard_good_fiber(family, center)?;

    if section.is_zero() {
        return Err(CoreError::BettiImageNotOpen);
    }

    let mut warnings = Vec::new();

    // N = 1: zeros of the x-denominator inside the disc.
    if n == 1 {
        let Some((x, _)) = section.section_coords() else {
            return Err(CoreError::domain(
                "torsion counting needs a section of the family",
            ));
        };
        let mut points = Vec::new();
        if x.denominator().degree().unwrap_or(0) > 0 {
            for (root, rad) in complex_roots(x.denominator())? {
                let d = (root - center).norm();
                if (d - radius).abs() <= 10.0 * rad.max(1e-12) {
                    warnings.push(format!(
                        "pole at λ = {root} sits on the disc boundary within its error radius"
                    ));
                }
                if d < radius {
                    points.push(TorsionHit {
                        lambda: root,
                        q: [0, 0],
                        residual: rad,
                    });
                }
            }
        }
        points.sort_by(|a, b| {
            (a.lambda.re, a.lambda.im)
                .partial_cmp(&(b.lambda.re, b.lambda.im))
                .unwrap()
        });
        return Ok(TorsionCountReport {
            n,
            disc_center: center,
            disc_radius: radius,
            count: points.len(),
            points,
            grid_per_axis: 0,
            warnings,
        });
    }

    // Anchor frame and openness check: the count is only well posed when
    // the Betti image of the disc is open, i.e. the map has rank 2.
    let anchor = frame_at(family, center)?.basis;
    let h = 1e-6 * center.norm().max(1.0);
    let (j0, noise0) = betti_jacobian(family, section, center, h, &anchor)?;
    let (s1, s2) = singular_values_2x2(&j0);
    if s1 <= (50.0 * noise0).max(1e-6) || s2 <= 1e-4 * s1 {
        return Err(CoreError::BettiImageNotOpen);
    }

    // Lipschitz constant of b over the disc, probed at center and four
    // interior points, with a safety factor.
    let mut lip = s1;
    for dz in [
        Complex64::new(0.7 * radius, 0.0),
        Complex64::new(-0.7 * radius, 0.0),
        Complex64::new(0.0, 0.7 * radius),
        Complex64::new(0.0, -0.7 * radius),
    ] {
        let lam = center + dz;
        let basis = frame_to(family, &anchor, center, lam)?;
        if let Ok((j, _)) = betti_jacobian(family, section, lam, h, &basis) {
            lip = lip.max(singular_values_2x2(&j).0);
        }
    }
    lip *= 1.5;

    // Grid: a torsion point moves N·b by at most N·lip·(cell diagonal)
    // within one cell, so cells of size 0.3/(N·lip) cannot hide a solution
    // from the pruning threshold below.
    let cell_target = 0.3 / (n as f64 * lip);
    let mut per_axis = ((2.0 * radius) / cell_target).ceil() as usize;
    per_axis = per_axis.clamp(8, 160);
    if grid_hint > 0 {
        per_axis = grid_hint.clamp(4, 400);
    }
    let cell = 2.0 * radius / per_axis as f64;
    if cell > cell_target && grid_hint == 0 {
        warnings.push(format!(
            "grid capped at {per_axis} cells per axis (wanted {:.0}); solutions may be missed",
            (2.0 * radius / cell_target).ceil()
        ));
    }
    let prune = (n as f64 * lip * cell * 0.75 + 1e-6).min(0.45);

    let mut hits: Vec<TorsionHit> = Vec::new();
    let newton_tol = HIT_TOL * 0.1;

    for iy in 0..=per_axis {
        for ix in 0..=per_axis {
            let lam0 = center
                + Complex64::new(
                    -radius + ix as f64 * cell,
                    -radius + iy as f64 * cell,
                );
            if (lam0 - center).norm() > radius + 0.5 * cell {
                continue;
            }
            let Ok(basis0) = frame_to(family, &anchor, center, lam0) else {
                continue;
            };
            let Ok(b0) = betti_of_section(family, &basis0, section, lam0) else {
                continue;
            };
            let miss = wrapped_miss(n as f64 * b0.coords[0])
                .max(wrapped_miss(n as f64 * b0.coords[1]));
            if miss > prune {
                continue;
            }

            // Newton from this seed, re-locking q each iterate.
            let mut lam = lam0;
            let mut jac: Option<[[f64; 2]; 2]> = None;
            let mut converged = None;
            for it in 0..30 {
                let Ok(basis) = frame_to(family, &anchor, center, lam) else {
                    break;
                };
                let Ok(b) = betti_of_section(family, &basis, section, lam) else {
                    break;
                };
                let psi = [
                    n as f64 * b.coords[0] - (n as f64 * b.coords[0]).round(),
                    n as f64 * b.coords[1] - (n as f64 * b.coords[1]).round(),
                ];
                let res = psi[0].abs().max(psi[1].abs());
                if res <= newton_tol {
                    converged = Some((lam, b));
                    break;
                }
                if jac.is_none() || it % 5 == 4 {
                    match betti_jacobian(family, section, lam, h, &basis) {
                        Ok((j, _)) => jac = Some(j),
                        Err(_) => break,
                    }
                }
                let j = jac.expect("jacobian freshly computed");
                let jn = [
                    [n as f64 * j[0][0], n as f64 * j[0][1]],
                    [n as f64 * j[1][0], n as f64 * j[1][1]],
                ];
                let Some(step) = solve2(&jn, [-psi[0], -psi[1]]) else {
                    break;
                };
                let dz = Complex64::new(step[0], step[1]);
                if dz.norm() > radius {
                    break;
                }
                lam += dz;
                if (lam - center).norm() > radius + 3.0 * cell {
                    break;
                }
            }

            let Some((lam_star, _)) = converged else {
                continue;
            };
            if (lam_star - center).norm() >= radius {
                continue;
            }
            if hits
                .iter()
                .any(|hit| (hit.lambda - lam_star).norm() < MERGE_RADIUS * center.norm().max(1.0))
            {
                continue;
            }

            // Certify with an independent frame continuation and a fresh
            // Betti evaluation.
            let Ok(basis) = frame_to(family, &anchor, center, lam_star) else {
                continue;
            };
            let Ok(b) = betti_of_section(family, &basis, section, lam_star) else {
                continue;
            };
            let scaled = [n as f64 * b.coords[0], n as f64 * b.coords[1]];
            let residual = wrapped_miss(scaled[0]).max(wrapped_miss(scaled[1]));
            if residual > HIT_TOL {
                continue;
            }
            let q = [
                (scaled[0].round() as i64).rem_euclid(n),
                (scaled[1].round() as i64).rem_euclid(n),
            ];
            hits.push(TorsionHit {
                lambda: lam_star,
                q,
                residual,
            });
        }
    }

    hits.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    Ok(TorsionCountReport {
        n,
        disc_center: center,
        disc_radius: radius,
        count: hits.len(),
        points: hits,
        grid_per_axis: per_axis,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cplx;
    use crate::arith::poly::Polynomial;
    use crate::arith::ratfunc::RationalFunction;

    fn quartic_family_with_section() -> (WeierstrassFamily, FamilyPoint) {
        let a4 = Polynomial::zero();
        let a6 = Polynomial::from_i64(&[0, 0, 0, -1, 1]);
        let fam = WeierstrassFamily::from_polys("quartic", a4, a6).unwrap();
        let x = RationalFunction::from_poly(Polynomial::from_i64(&[0, 1]));
        let y = RationalFunction::from_poly(Polynomial::from_i64(&[0, 0, 1]));
        let sec = fam.section(x, y).unwrap();
        (fam, sec)
    }

    #[test]
    fn zero_section_is_refused() {
        let (fam, _) = quartic_family_with_section();
        let err = torsion_specialization_count(
            &fam,
            &FamilyPoint::zero_section(),
            cplx(1.7, 0.4),
            0.2,
            5,
            0,
        )
        .unwrap_err();
        assert_eq!(err, CoreError::BettiImageNotOpen);
    }

    #[test]
    fn polynomial_sections_have_no_order_one_hits() {
        let (fam, sec) = quartic_family_with_section();
        let rep =
            torsion_specialization_count(&fam, &sec, cplx(1.7, 0.4), 0.25, 1, 0).unwrap();
        assert_eq!(rep.count, 0);
    }

    #[test]
    fn discs_touching_the_singular_locus_are_rejected() {
        let (fam, sec) = quartic_family_with_section();
        // λ = 1 is a singular fiber of y² = x³ + λ⁴ − λ³.
        let err = torsion_specialization_count(&fam, &sec, cplx(1.2, 0.0), 0.3, 4, 0)
            .unwrap_err();
        assert_eq!(err, CoreError::TooCloseToDiscriminant);
    }

    #[test]
    fn hits_are_certified_and_deduplicated() {
        let (fam, sec) = quartic_family_with_section();
        let rep =
            torsion_specialization_count(&fam, &sec, cplx(1.7, 0.4), 0.25, 4, 0).unwrap();
        for hit in &rep.points {
            assert!(hit.residual <= HIT_TOL, "uncertified hit {hit:?}");
            assert!((hit.lambda - cplx(1.7, 0.4)).norm() < 0.25);
            assert!(hit.q[0] >= 0 && hit.q[0] < 4 && hit.q[1] >= 0 && hit.q[1] < 4);
        }
        for (i, a) in rep.points.iter().enumerate() {
            for b in rep.points.iter().skip(i + 1) {
                assert!((a.lambda - b.lambda).norm() > MERGE_RADIUS);
            }
        }
    }

    #[test]
    fn counts_are_monotone_under_divisibility() {
        // Every point with [2]P = O also satisfies [4]P = O.
        let (fam, sec) = quartic_family_with_section();
        let center = cplx(1.7, 0.4);
        let r2 = torsion_specialization_count(&fam, &sec, center, 0.25, 2, 0).unwrap();
        let r4 = torsion_specialization_count(&fam, &sec, center, 0.25, 4, 0).unwrap();
        assert!(r4.count >= r2.count, "{} < {}", r4.count, r2.count);
        for hit in &r2.points {
            assert!(
                r4.points
                    .iter()
                    .any(|h| (h.lambda - hit.lambda).norm() < 1e-5),
                "order-2 hit {hit:?} missing from the order-4 report"
            );
        }
    }
}
