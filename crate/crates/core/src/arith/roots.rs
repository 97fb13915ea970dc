//! Floating root isolation for exact polynomials.
//!
//! The entry point takes the exact square-free part first, so multiple roots
//! cannot stall the solver, then runs Durand–Kerner simultaneous iteration on
//! the monic double-precision image and polishes each root by Newton steps
//! against the exact coefficients.  Each root comes with a pessimistic error
//! radius `deg·|p(z)|/|p'(z)|`, which feeds the isolating balls of algebraic
//! numbers.

use num_complex::Complex64;

use crate::arith::ball::cplx;
use crate::arith::poly::Polynomial;
use crate::arith::rational::rat_to_f64;
use crate::error::{CoreError, Result};

/// Evaluate an ascending-coefficient complex polynomial by Horner's rule.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = cplx(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Horner evaluation of p and p′ with a shared rescaling exponent, so the
/// Newton ratio p/p′ survives degrees and magnitudes whose raw powers
/// overflow f64.  Returns (p·2⁻ᵉ, p′·2⁻ᵉ) for an untracked common e;
/// only the ratio and the zero-ness of each part are meaningful.
fn horner_pair_scaled(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let n = coeffs.len() - 1;
    let mut p = coeffs[n];
    let mut d = cplx(0.0, 0.0);
    for k in (0..n).rev() {
        d = d * z + p;
        p = p * z + coeffs[k];
        let m = p.norm().max(d.norm());
        if m > 1e200 {
            p *= 1e-200;
            d *= 1e-200;
        } else if m > 0.0 && m < 1e-200 {
            p *= 1e200;
            d *= 1e200;
        }
    }
    (p, d)
}

/// All roots of a complex-coefficient polynomial, ascending coefficients,
/// leading coefficient nonzero.  Multiplicities are the caller's problem;
/// clustered roots come back as nearby values.
pub fn roots_complex_coeffs(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.last().map_or(false, |t| t.norm() == 0.0) {
        c.pop();
    }
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    let lead = *c.last().expect("nonempty");
    if !lead.is_finite() || c.iter().any(|t| !t.is_finite()) {
        return Err(CoreError::domain(
            "non-finite coefficient in root solve".to_string(),
        ));
    }
    for t in c.iter_mut() {
        *t /= lead;
    }
    // Exact roots at the origin peel off first, so the simultaneous
    // iteration never has to resolve a cluster sitting on zero.
    let mut zero_mult = 0usize;
    while c.first().map_or(false, |t| t.norm() == 0.0) && c.len() > 1 {
        c.remove(0);
        zero_mult += 1;
    }
    let n = c.len() - 1;
    let mut out = vec![cplx(0.0, 0.0); zero_mult];
    if n == 0 {
        return Ok(out);
    }
    if n == 1 {
        out.push(-c[0]);
        return Ok(out);
    }

    // Fujiwara bound: every root satisfies |z| ≤ 2·max_k |c_{n−k}|^{1/k}.
    // Coefficient magnitudes can be astronomically larger than the roots
    // (division polynomials reach 1e50 while their roots stay small), so
    // only a k-th-root bound keeps the start circle near the root set.
    let mut fujiwara = 0.0f64;
    for k in 1..=n {
        let m = c[n - k].norm();
        if m > 0.0 {
            fujiwara = fujiwara.max(m.powf(1.0 / k as f64));
        }
    }
    let bound = (2.0 * fujiwara).max(1e-30);

    // Newton-polygon initialization: the upper convex hull of
    // (k, ln|c_k|) splits the index range into runs, and each run of
    // length ℓ contributes ℓ starting points on a circle whose radius is
    // the hull-slope estimate of those roots' magnitudes.  This respects
    // wide dynamic ranges in the root set, which a single circle does not.
    let logs: Vec<f64> = c
        .iter()
        .map(|t| {
            let m = t.norm();
            if m > 0.0 {
                m.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if logs[k] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Keep the hull upper-convex: drop b if it lies below the
            // chord from a to k.
            if (logs[b] - logs[a]) * ((k - a) as f64)
                <= (logs[k] - logs[a]) * ((b - a) as f64)
            {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut z: Vec<Complex64> = Vec::with_capacity(n);
    let golden = 2.0 * std::f64::consts::PI * 0.381_966;
    for seg in hull.windows(2) {
        let (k1, k2) = (seg[0], seg[1]);
        let r = ((logs[k1] - logs[k2]) / ((k2 - k1) as f64))
            .exp()
            .clamp(1e-12 * bound, bound);
        for j in 0..(k2 - k1) {
            let theta = golden * (z.len() as f64) + 0.3
                + 2.0 * std::f64::consts::PI * (j as f64) / ((k2 - k1) as f64);
            z.push(Complex64::from_polar(r, theta));
        }
    }
    while z.len() < n {
        let theta = golden * (z.len() as f64) + 0.3;
        z.push(Complex64::from_polar(0.7 * bound, theta));
    }

    // Aberth–Ehrlich simultaneous iteration.  Every polynomial evaluation
    // goes through the exponent-sharing Horner pair, so only the Newton
    // ratio matters and no magnitude ever overflows.
    let tol = 1e-15;
    // Inward drift from a too-large start circle progresses like (1 − 1/n)
    // per sweep, so stragglers need O(n·ln) sweeps; converged roots freeze,
    // which keeps late sweeps cheap.
    let sweeps = 120 + 16 * n;
    let mut frozen = vec![false; n];
    // Deterministic xorshift for straggler reseeds.
    let mut rng_state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next_rand = move || {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for sweep in 0..sweeps {
        // Iterates crowding a region with fewer roots than iterates can
        // reach a repulsion standoff; scatter the unconverged ones over
        // log-uniform radii every few hundred sweeps to break it.
        if sweep > 0 && sweep % 250 == 0 {
            for (i, zi) in z.iter_mut().enumerate() {
                if !frozen[i] {
                    let r = bound * (1e-6f64).powf(next_rand());
                    let theta = 2.0 * std::f64::consts::PI * next_rand();
                    *zi = Complex64::from_polar(r, theta);
                }
            }
        }
        let mut moved = 0.0f64;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let (pv, dv) = horner_pair_scaled(&c, z[i]);
            if !pv.is_finite() || !dv.is_finite() {
                z[i] = Complex64::from_polar(1.1 * bound, golden * (i as f64));
                moved = f64::MAX;
                continue;
            }
            if pv.norm() == 0.0 {
                frozen[i] = true;
                continue;
            }
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                // Flat spot: take a sideways step at the local scale.
                moved = f64::MAX;
                let bump = cplx(1e-3, 1e-3) * (1.0 + z[i].norm());
                z[i] += bump;
                continue;
            };
            let mut repel = cplx(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        continue;
                    }
                    repel += cplx(1.0, 0.0) / d;
                }
            }
            let denom = cplx(1.0, 0.0) - newton * repel;
            let step = if denom.norm() > 1e-290 {
                newton / denom
            } else {
                newton
            };
            let mut next = z[i] - step;
            if !next.is_finite() || next.norm() > 8.0 * bound {
                next = Complex64::from_polar(1.1 * bound, golden * (i as f64) + 1.1);
                moved = f64::MAX;
            } else {
                let rel = step.norm() / (1.0 + next.norm());
                if rel < tol {
                    frozen[i] = true;
                }
                moved = moved.max(rel);
            }
            z[i] = next;
        }
        if moved < tol {
            break;
        }
    }

    // Newton polish, again through the overflow-safe pair evaluation.
    for zi in z.iter_mut() {
        for _ in 0..12 {
            let (pv, dv) = horner_pair_scaled(&c, *zi);
            if dv.norm() == 0.0 || !dv.is_finite() || !pv.is_finite() {
                break;
            }
            let step = pv / dv;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
            if step.norm() < 1e-17 * (1.0 + zi.norm()) {
                break;
            }
        }
        out.push(*zi);
    }
    Ok(out)
}

/// Pessimistic error radius for an approximate root `z` of the polynomial
/// with the given coefficients: `deg · |p(z)/p′(z)|`, with a floor guard.
/// Evaluation shares one rescaling exponent between p and p′, so the ratio
/// stays meaningful at degrees whose raw powers leave f64 range.
pub fn root_error_radius(coeffs: &[Complex64], z: Complex64) -> f64 {
    let n = coeffs.len().saturating_sub(1) as f64;
    if coeffs.len() < 2 {
        return f64::INFINITY;
    }
    let (pv, dv) = horner_pair_scaled(coeffs, z);
    let d = dv.norm();
    let v = pv.norm();
    if d == 0.0 {
        return if v == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (n * v / d).max(z.norm() * 8.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

fn poly_to_complex(p: &Polynomial) -> Vec<Complex64> {
    p.coeffs().iter().map(|c| cplx(rat_to_f64(c), 0.0)).collect()
}

/// Distinct complex roots of an exact polynomial (square-free reduction is
/// applied internally), paired with pessimistic error radii.
pub fn complex_roots(p: &Polynomial) -> Result<Vec<(Complex64, f64)>> {
    if p.is_zero() {
        return Err(CoreError::domain(
            "root solve on the zero polynomial".to_string(),
        ));
    }
    let sf = p.square_free_part();
    if sf.is_constant() {
        return Ok(Vec::new());
    }
    let coeffs = poly_to_complex(&sf);
    let roots = roots_complex_coeffs(&coeffs)?;
    Ok(roots
        .into_iter()
        .map(|z| (z, root_error_radius(&coeffs, z)))
        .collect())
}

/// Roots of the depressed Weierstrass cubic x³ + p·x + q with complex
/// coefficients; exactly three values (with multiplicity as clusters).
pub fn cubic_roots(p: Complex64, q: Complex64) -> Result<[Complex64; 3]> {
    let coeffs = [q, p, cplx(0.0, 0.0), cplx(1.0, 0.0)];
    let roots = roots_complex_coeffs(&coeffs)?;
    debug_assert_eq!(roots.len(), 3);
    Ok([roots[0], roots[1], roots[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_root_set(found: &[(Complex64, f64)], expected: &[Complex64], tol: f64) {
        assert_eq!(found.len(), expected.len());
        for e in expected {
            assert!(
                found.iter().any(|(z, _)| (z - e).norm() < tol),
                "missing root {e} in {found:?}"
            );
        }
    }

    #[test]
    fn factored_cubic_roots() {
        // (λ² + 1)(λ − 2)
        let p = &Polynomial::from_i64(&[1, 0, 1]) * &Polynomial::from_i64(&[-2, 1]);
        let roots = complex_roots(&p).unwrap();
        assert_root_set(
            &roots,
            &[cplx(0.0, 1.0), cplx(0.0, -1.0), cplx(2.0, 0.0)],
            1e-10,
        );
        for (_, r) in roots {
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn square_free_reduction_handles_multiplicity() {
        // (λ − 3)⁴ has the single distinct root 3.
        let p = Polynomial::from_i64(&[-3, 1]).pow(4);
        let roots = complex_roots(&p).unwrap();
        assert_root_set(&roots, &[cplx(3.0, 0.0)], 1e-9);
    }

    #[test]
    fn golden_ratio_roots() {
        let p = Polynomial::from_i64(&[-1, -1, 1]);
        let roots = complex_roots(&p).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert_root_set(&roots, &[cplx(phi, 0.0), cplx(1.0 - phi, 0.0)], 1e-12);
    }

    #[test]
    fn cubic_fast_path_matches_factorization() {
        // x³ − x = x(x−1)(x+1)
        let r = cubic_roots(cplx(-1.0, 0.0), cplx(0.0, 0.0)).unwrap();
        let expected = [cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(-1.0, 0.0)];
        for e in expected {
            assert!(r.iter().any(|z| (z - e).norm() < 1e-10));
        }
        // Complex coefficients: x³ + ix = x(x² + i).
        let r = cubic_roots(cplx(0.0, 1.0), cplx(0.0, 0.0)).unwrap();
        for z in r {
            let v = z * z * z + cplx(0.0, 1.0) * z;
            assert!(v.norm() < 1e-10);
        }
    }

    #[test]
    fn random_polynomials_against_evaluation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let deg = rng.gen_range(2..=7);
            let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-9..=9)).collect();
            let p = Polynomial::from_i64(&coeffs);
            if p.degree().unwrap_or(0) < 1 {
                continue;
            }
            for (z, r) in complex_roots(&p).unwrap() {
                assert!(r < 1e-6, "poor residual for {p}: radius {r}");
                assert!(p.eval_complex(z).norm() < 1e-6 * (1.0 + z.norm().powi(deg as i32)));
            }
        }
    }
}
