//! Numeric division polynomials for a fixed fiber `y² = x³ + a·x + b`.
//!
//! `g_n` denotes the y-free part of the n-th division polynomial after the
//! substitution y² = f(x): for odd n the polynomial itself, for even n the
//! cofactor with ψ_n = y·g_n (so the even torsion locus also picks up the
//! roots of f).  Roots of the reduced polynomial are exactly the
//! x-coordinates of the nonzero points killed by [n].  Everything here is
//! double-precision; it feeds tests and Betti-map experiments, not exact
//! arithmetic.

use num_complex::Complex64;

use crate::arith::ball::cplx;
use crate::arith::roots::roots_complex_coeffs;
use crate::error::Result;

type CPoly = Vec<Complex64>;

fn ctrim(mut v: CPoly) -> CPoly {
    while v.last().map_or(false, |c| c.norm() == 0.0) {
        v.pop();
    }
    v
}

fn cmul(a: &[Complex64], b: &[Complex64]) -> CPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![cplx(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ctrim(out)
}

fn csub(a: &[Complex64], b: &[Complex64]) -> CPoly {
    let n = a.len().max(b.len());
    let mut out = vec![cplx(0.0, 0.0); n];
    for (k, slot) in out.iter_mut().enumerate() {
        let x = a.get(k).copied().unwrap_or_else(|| cplx(0.0, 0.0));
        let y = b.get(k).copied().unwrap_or_else(|| cplx(0.0, 0.0));
        *slot = x - y;
    }
    ctrim(out)
}

fn cscale(a: &[Complex64], s: f64) -> CPoly {
    ctrim(a.iter().map(|c| c * s).collect())
}

/// Coefficients (ascending in x) of the reduced division polynomial `g_n`
/// for the fiber `y² = x³ + a·x + b`.
pub fn division_poly_x(n: usize, a: Complex64, b: Complex64) -> CPoly {
    let one = cplx(1.0, 0.0);
    let f: CPoly = vec![b, a, cplx(0.0, 0.0), one]; // x³ + a x + b
    let f2 = cmul(&f, &f);
    let mut g: Vec<CPoly> = Vec::with_capacity(n.max(5) + 1);
    g.push(Vec::new()); // g₀ = 0
    g.push(vec![one]); // g₁ = 1
    g.push(vec![cplx(2.0, 0.0)]); // g₂ = 2 (ψ₂ = 2y)
    g.push(ctrim(vec![
        // g₃ = 3x⁴ + 6a x² + 12b x − a²
        -(a * a),
        12.0 * b,
        6.0 * a,
        cplx(0.0, 0.0),
        cplx(3.0, 0.0),
    ]));
    g.push(cscale(
        // g₄ = 4(x⁶ + 5a x⁴ + 20b x³ − 5a² x² − 4ab x − (8b² + a³))
        &[
            -(8.0 * b * b + a * a * a),
            -4.0 * a * b,
            -5.0 * a * a,
            20.0 * b,
            5.0 * a,
            cplx(0.0, 0.0),
            one,
        ],
        4.0,
    ));
    for k in 5..=n.max(4) {
        if k % 2 == 1 {
            // k = 2m+1: g = f²·g_{m+2}g_m³ − g_{m−1}g_{m+1}³ for even m,
            // with f² moving to the other term for odd m.
            let m = (k - 1) / 2;
            let t1 = cmul(&g[m + 2], &cmul(&g[m], &cmul(&g[m], &g[m])));
            let t2 = cmul(&g[m - 1], &cmul(&g[m + 1], &cmul(&g[m + 1], &g[m + 1])));
            let val = if m % 2 == 0 {
                csub(&cmul(&f2, &t1), &t2)
            } else {
                csub(&t1, &cmul(&f2, &t2))
            };
            g.push(val);
        } else {
            // k = 2m: g = g_m·(g_{m+2}g_{m−1}² − g_{m−2}g_{m+1}²)/2.
            let m = k / 2;
            let t1 = cmul(&g[m + 2], &cmul(&g[m - 1], &g[m - 1]));
            let t2 = cmul(&g[m - 2], &cmul(&g[m + 1], &g[m + 1]));
            g.push(cscale(&cmul(&g[m], &csub(&t1, &t2)), 0.5));
        }
    }
    g.swap_remove(n)
}

/// x-coordinates of all nonzero P on the fiber with [n]·P = O, as floating
/// values (deduplicated within a relative tolerance).
pub fn torsion_x_coords(n: usize, a: Complex64, b: Complex64) -> Result<Vec<Complex64>> {
    assert!(n >= 2, "torsion level must be at least 2");
    let mut locus = division_poly_x(n, a, b);
    if n % 2 == 0 {
        // Even levels also kill the 2-torsion, where y = 0.
        let f = vec![b, a, cplx(0.0, 0.0), cplx(1.0, 0.0)];
        locus = cmul(&locus, &f);
    }
    let roots = roots_complex_coeffs(&locus)?;
    // Merge at a pairwise local scale: a single runaway approximation must
    // not inflate the merge radius for the whole root set.
    let mut out: Vec<Complex64> = Vec::new();
    for z in roots {
        if out
            .iter()
            .all(|w| (w - z).norm() > 1e-8 * (1.0 + w.norm().min(z.norm())))
        {
            out.push(z);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::roots::cubic_roots;

    #[test]
    fn two_torsion_locus_is_the_cubic_root_set() {
        let (a, b) = (cplx(-2.0, 0.0), cplx(1.0, 0.0));
        let xs = torsion_x_coords(2, a, b).unwrap();
        let roots = cubic_roots(a, b).unwrap();
        assert_eq!(xs.len(), 3);
        for r in roots {
            assert!(xs.iter().any(|x| (x - r).norm() < 1e-9));
        }
    }

    #[test]
    fn three_torsion_is_fixed_by_the_duplication_x_map() {
        // [2]P = −P for 3-torsion, so x([2]P) = x(P).
        let (a, b) = (cplx(-2.0, 0.0), cplx(1.0, 0.0));
        let xs = torsion_x_coords(3, a, b).unwrap();
        assert_eq!(xs.len(), 4); // (9 − 1)/2 points, paired by x
        for x in xs {
            let num = (x * x - a) * (x * x - a) - 8.0 * b * x;
            let den = 4.0 * (x * x * x + a * x + b);
            let x2 = num / den;
            assert!((x2 - x).norm() < 1e-7, "x = {x} not fixed: {x2}");
        }
    }

    #[test]
    fn torsion_counts_match_group_structure() {
        // Number of distinct x-values among nonzero n-torsion points:
        // (n² − 1)/2 for odd n, (n² − 4)/2 + 3 for even n (pairing ± and
        // counting the three 2-torsion points once each).
        let (a, b) = (cplx(1.0, 0.5), cplx(0.25, -1.0)); // generic complex fiber
        for n in 2..=8usize {
            let expected = if n % 2 == 1 {
                (n * n - 1) / 2
            } else {
                (n * n - 4) / 2 + 3
            };
            let got = torsion_x_coords(n, a, b).unwrap().len();
            assert_eq!(got, expected, "level {n}");
        }
    }

    #[test]
    fn division_polynomial_degrees() {
        let (a, b) = (cplx(-1.0, 0.0), cplx(1.0, 0.0));
        // deg g_n = (n² − 1)/2 for odd n, (n² − 4)/2 for even n.
        for n in 2..=12usize {
            let g = division_poly_x(n, a, b);
            let expected = if n % 2 == 1 {
                (n * n - 1) / 2
            } else {
                (n * n - 4) / 2
            };
            assert_eq!(g.len() - 1, expected, "level {n}");
        }
    }
}
