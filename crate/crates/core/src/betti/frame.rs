//! Analytic continuation of period bases along paths in the base, and the
//! monodromy it induces.
//!
//! [`crate::betti::agm::period_basis`] returns *some* reduced basis of the
//! period lattice at one fiber; nothing ties the choices at two different
//! fibers together.  A *frame* fixes that: starting from an anchor basis,
//! the basis is continued along a path by re-solving the AGM periods at
//! each step and re-locking the continued generators onto the nearest
//! lattice vectors.  A step is accepted only when the re-lock is
//! unambiguous (rounding distance ≤ ¼, relative motion ≤ 20%, unimodular
//! change of basis); otherwise the step is bisected, so short noisy steps
//! cannot silently slip a lattice generator.
//!
//! Continuation around a closed loop returns to a basis of the *same*
//! lattice, and the integer matrix expressing the continued basis in the
//! starting one is the monodromy of the loop.  Composition of loops
//! multiplies matrices in path order: `M(A·B) = M(A)·M(B)` with the row
//! convention `ω′ᵢ = Σⱼ Mᵢⱼ ωⱼ`.

use num_complex::Complex64;

use crate::betti::agm::{period_basis, PeriodBasis};
use crate::error::{CoreError, Result};
use crate::family::WeierstrassFamily;

/// A period basis bound to the fiber it was computed on.
#[derive(Debug, Clone, Copy)]
pub struct PeriodFrame {
    pub base_point: Complex64,
    pub basis: PeriodBasis,
}

/// An integer monodromy matrix together with the numeric quality of the
/// final re-lock (relative distance of the continued generators from the
/// integer combination).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyMatrix {
    /// Row convention: continued `ωᵢ` equals `Σⱼ entries[i][j]·ωⱼ`.
    pub entries: [[i64; 2]; 2],
    pub residual: f64,
}

impl MonodromyMatrix {
    pub fn det(&self) -> i64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    pub fn is_identity(&self) -> bool {
        self.entries == [[1, 0], [0, 1]]
    }

    /// Trace of the matrix.
    pub fn trace(&self) -> i64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// (M − I)² = 0: the loop acts by a single Jordan block.
    pub fn is_unipotent(&self) -> bool {
        let m = self.entries;
        let a = m[0][0] - 1;
        let d = m[1][1] - 1;
        let (b, c) = (m[0][1], m[1][0]);
        a * a + b * c == 0 && b * (a + d) == 0 && c * (a + d) == 0 && d * d + b * c == 0
    }

    pub fn mul(&self, other: &MonodromyMatrix) -> MonodromyMatrix {
        let a = self.entries;
        let b = other.entries;
        let mut out = [[0i64; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        MonodromyMatrix {
            entries: out,
            residual: self.residual.max(other.residual),
        }
    }
}

/// Reject base points too close to the singular locus for analytic work.
pub fn guard_good_fiber(family: &WeierstrassFamily, lambda: Complex64) -> Result<()> {
    for ball in &family.singular_values().finite {
        let threshold = (10.0 * ball.radius).max(1e-6 * (1.0 + ball.center.norm()));
        if (lambda - ball.center).norm() < threshold {
            return Err(CoreError::TooCloseToDiscriminant);
        }
    }
    Ok(())
}

/// Anchor a frame at a base point (an arbitrary reduced basis).
pub fn frame_at(family: &WeierstrassFamily, lambda: Complex64) -> Result<PeriodFrame> {
    guard_good_fiber(family, lambda)?;
    let (a4, a6) = family.coeffs_complex(lambda)?;
    Ok(PeriodFrame {
        base_point: lambda,
        basis: period_basis(a4, a6)?,
    })
}

/// Re-lock a continued basis onto the lattice at the new fiber.  Returns
/// the locked basis and the worst rounding distance, or `None` when the
/// lock is ambiguous or not unimodular (caller should shorten the step).
fn relock(prev: &PeriodBasis, fresh: &PeriodBasis) -> Option<(PeriodBasis, f64)> {
    let mut locked = [Complex64::new(0.0, 0.0); 2];
    let mut m = [[0i64; 2]; 2];
    let mut worst = 0.0f64;
    for (i, omega) in [prev.omega1, prev.omega2].into_iter().enumerate() {
        let (alpha, beta) = fresh.coords(omega);
        let (ra, rb) = (alpha.round(), beta.round());
        let ambiguity = (alpha - ra).abs().max((beta - rb).abs());
        if ambiguity > 0.25 {
            return None;
        }
        let v = fresh.omega1 * ra + fresh.omega2 * rb;
        // The generator must not have moved by a sizable fraction of
        // itself across one accepted step.
        if (v - omega).norm() > 0.2 * omega.norm() {
            return None;
        }
        worst = worst.max(ambiguity);
        locked[i] = v;
        m[i] = [ra as i64, rb as i64];
    }
    if (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs() != 1 {
        return None;
    }
    Some((
        PeriodBasis {
            omega1: locked[0],
            omega2: locked[1],
        },
        worst,
    ))
}

fn continue_segment(
    family: &WeierstrassFamily,
    basis: &PeriodBasis,
    from: Complex64,
    to: Complex64,
    depth: u32,
) -> Result<PeriodBasis> {
    if depth > 24 {
        return Err(CoreError::RefineLoopSubdivision);
    }
    let fresh = match family
        .coeffs_complex(to)
        .and_then(|(a4, a6)| period_basis(a4, a6))
    {
        Ok(b) => b,
        // A step landing too close to a singular fiber: the path itself is
        // bad, no amount of subdividing this segment fixes the endpoint.
        Err(e) => return Err(e),
    };
    if let Some((locked, _)) = relock(basis, &fresh) {
        return Ok(locked);
    }
    let mid = (from + to) / 2.0;
    let half = continue_segment(family, basis, from, mid, depth + 1)?;
    continue_segment(family, &half, mid, to, depth + 1)
}

/// Continue a basis along a piecewise-linear path.  `path[0]` must be the
/// fiber the basis belongs to.
pub fn continue_basis(
    family: &WeierstrassFamily,
    basis: &PeriodBasis,
    path: &[Complex64],
) -> Result<PeriodBasis> {
    if path.len() < 2 {
        return Ok(*basis);
    }
    let mut current = *basis;
    for w in path.windows(2) {
        guard_good_fiber(family, w[1])?;
        current = continue_segment(family, &current, w[0], w[1], 0)?;
    }
    Ok(current)
}

/// Monodromy of a closed loop (first and last path points must coincide).
pub fn monodromy(family: &WeierstrassFamily, path: &[Complex64]) -> Result<MonodromyMatrix> {
    let (first, last) = match (path.first(), path.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(CoreError::domain("empty monodromy path")),
    };
    if (first - last).norm() > 1e-9 * (1.0 + first.norm()) {
        return Err(CoreError::domain(
            "monodromy path is not closed".to_string(),
        ));
    }
    let frame = frame_at(family, first)?;
    let continued = continue_basis(family, &frame.basis, path)?;

    let mut entries = [[0i64; 2]; 2];
    let mut residual = 0.0f64;
    for (i, omega) in [continued.omega1, continued.omega2].into_iter().enumerate() {
        let (alpha, beta) = frame.basis.coords(omega);
        let (ra, rb) = (alpha.round(), beta.round());
        let locked = frame.basis.omega1 * ra + frame.basis.omega2 * rb;
        residual = residual.max((locked - omega).norm() / omega.norm());
        entries[i] = [ra as i64, rb as i64];
    }
    let m = MonodromyMatrix { entries, residual };
    if residual >= 1e-4 {
        return Err(CoreError::InsufficientPrecision(format!(
            "monodromy re-lock residual {residual:.3e} exceeds 1e-4"
        )));
    }
    if m.det().abs() != 1 {
        return Err(CoreError::NonConvergent(format!(
            "continued basis is not unimodular over the anchor (det = {})",
            m.det()
        )));
    }
    Ok(m)
}

/// A closed counterclockwise circle as a polygonal path (first point
/// repeated at the end).
pub fn circle_loop(center: Complex64, radius: f64, segments: usize) -> Vec<Complex64> {
    let n = segments.max(8);
    (0..=n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
            center + Complex64::from_polar(radius, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cplx;

    fn legendre() -> WeierstrassFamily {
        WeierstrassFamily::legendre()
    }

    /// Straight polygonal path a → b with `n` steps.
    fn segment(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
        (0..=n)
            .map(|k| a + (b - a) * (k as f64 / n as f64))
            .collect()
    }

    /// A loop based at `base` that travels to the circle around `center`,
    /// walks it counterclockwise, and returns.
    fn based_loop(base: Complex64, center: Complex64, radius: f64) -> Vec<Complex64> {
        let start = center + cplx(radius, 0.0);
        let mut path = segment(base, start, 24);
        path.extend(circle_loop(center, radius, 48).into_iter().skip(1));
        path.extend(segment(start, base, 24).into_iter().skip(1));
        path
    }

    #[test]
    fn trivial_loop_has_identity_monodromy() {
        let fam = legendre();
        let m = monodromy(&fam, &circle_loop(cplx(3.0, 0.0), 0.4, 32)).unwrap();
        assert!(m.is_identity(), "{:?}", m.entries);
        assert!(m.residual < 1e-6);
    }

    #[test]
    fn loops_around_singular_fibers_are_unipotent() {
        let fam = legendre();
        for center in [cplx(0.0, 0.0), cplx(1.0, 0.0)] {
            let m = monodromy(&fam, &based_loop(cplx(0.5, 0.7), center, 0.3)).unwrap();
            assert_eq!(m.det(), 1, "{:?}", m.entries);
            assert!(!m.is_identity(), "loop around {center} acted trivially");
            assert!(m.is_unipotent(), "{:?} is not unipotent", m.entries);
            assert!(m.residual < 1e-4);
        }
    }

    #[test]
    fn monodromy_composes_along_concatenated_loops() {
        let fam = legendre();
        let base = cplx(0.5, 0.7);
        let loop0 = based_loop(base, cplx(0.0, 0.0), 0.3);
        let loop1 = based_loop(base, cplx(1.0, 0.0), 0.3);
        let m0 = monodromy(&fam, &loop0).unwrap();
        let m1 = monodromy(&fam, &loop1).unwrap();
        let mut concat = loop0.clone();
        concat.extend(loop1.iter().skip(1));
        let mc = monodromy(&fam, &concat).unwrap();
        assert_eq!(mc.entries, m0.mul(&m1).entries, "path-order composition");
    }

    #[test]
    fn reversed_loop_inverts_the_monodromy() {
        let fam = legendre();
        let path = based_loop(cplx(0.5, 0.7), cplx(0.0, 0.0), 0.3);
        let mut rev = path.clone();
        rev.reverse();
        let m = monodromy(&fam, &path).unwrap();
        let mi = monodromy(&fam, &rev).unwrap();
        assert!(m.mul(&mi).is_identity());
    }

    #[test]
    fn paths_through_singular_values_are_rejected() {
        let fam = legendre();
        let err = monodromy(&fam, &circle_loop(cplx(0.0, 0.0), 1.0, 16)).unwrap_err();
        // The circle |λ| = 1 passes through the singular value λ = 1.
        assert!(
            matches!(
                err,
                CoreError::TooCloseToDiscriminant | CoreError::InsufficientPrecision(_)
            ),
            "{err:?}"
        );
    }

    #[test]
    fn continuation_is_locally_consistent() {
        let fam = legendre();
        let a = cplx(2.0, 0.5);
        let b = cplx(2.3, 0.8);
        let frame = frame_at(&fam, a).unwrap();
        // One long step vs. many short ones: identical frames.
        let direct = continue_basis(&fam, &frame.basis, &segment(a, b, 1)).unwrap();
        let fine = continue_basis(&fam, &frame.basis, &segment(a, b, 40)).unwrap();
        assert!((direct.omega1 - fine.omega1).norm() < 1e-9);
        assert!((direct.omega2 - fine.omega2).norm() < 1e-9);
    }
}
