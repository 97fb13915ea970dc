//! Cross-validation of the analytic torsion counter against the algebraic
//! division polynomials: every fiber the counter certifies must place the
//! section's x-coordinate on the division locus of the same level.

use heightlab_core::arith::poly::Polynomial;
use heightlab_core::arith::ratfunc::RationalFunction;
use heightlab_core::family::{torsion_x_coords, FamilyPoint, WeierstrassFamily};
use heightlab_core::lattice::torsion_specialization_count;
use num_complex::Complex64;

fn quartic_with_section() -> (WeierstrassFamily, FamilyPoint) {
    let fam = WeierstrassFamily::from_polys(
        "quartic",
        Polynomial::zero(),
        Polynomial::from_i64(&[0, 0, 0, -1, 1]),
    )
    .unwrap();
    let x = RationalFunction::from_poly(Polynomial::from_i64(&[0, 1]));
    let y = RationalFunction::from_poly(Polynomial::from_i64(&[0, 0, 1]));
    let sec = fam.section(x, y).unwrap();
    (fam, sec)
}

/// Each λ* reported at level N satisfies [N]P(λ*) = O, so x(P(λ*)) = λ*
/// must be a root of the level-N division locus on that fiber.
#[test]
fn counted_fibers_lie_on_the_division_locus() {
    let (fam, sec) = quartic_with_section();
    let center = Complex64::new(1.8, 0.5);
    let n = 20usize;
    let report =
        torsion_specialization_count(&fam, &sec, center, 0.6, n as i64, 0).unwrap();
    assert!(
        report.count >= 1,
        "expected at least one torsion fiber in this disc at level {n}"
    );
    for hit in &report.points {
        let lam = hit.lambda;
        let a4 = Complex64::new(0.0, 0.0);
        let a6 = lam.powi(4) - lam.powi(3);
        let locus = torsion_x_coords(n, a4, a6).unwrap();
        let scale = lam.norm().max(1.0);
        let nearest = locus
            .iter()
            .map(|z| (z - lam).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest < 1e-5 * scale,
            "λ* = {lam} is {nearest:.3e} away from the division locus"
        );
    }
}

/// The algebraic locus also confirms the exact order: none of the counted
/// fibers at level 20 should already die at a proper divisor level unless
/// the divisor-level counter reports them too.
#[test]
fn divisor_levels_are_consistent() {
    let (fam, sec) = quartic_with_section();
    let center = Complex64::new(1.8, 0.5);
    let r20 = torsion_specialization_count(&fam, &sec, center, 0.6, 20, 0).unwrap();
    let r10 = torsion_specialization_count(&fam, &sec, center, 0.6, 10, 0).unwrap();
    // Every level-10 fiber is a level-20 fiber.
    for h in &r10.points {
        assert!(
            r20.points
                .iter()
                .any(|g| (g.lambda - h.lambda).norm() < 1e-5),
            "level-10 hit {} missing at level 20",
            h.lambda
        );
    }
    // And a level-20 fiber on the level-10 division locus must have been
    // counted at level 10.
    for h in &r20.points {
        let a6 = h.lambda.powi(4) - h.lambda.powi(3);
        let locus10 = torsion_x_coords(10, Complex64::new(0.0, 0.0), a6).unwrap();
        let on10 = locus10.iter().any(|z| (z - h.lambda).norm() < 1e-6);
        let counted10 = r10
            .points
            .iter()
            .any(|g| (g.lambda - h.lambda).norm() < 1e-5);
        assert_eq!(on10, counted10, "divisor-level mismatch at {}", h.lambda);
    }
}
