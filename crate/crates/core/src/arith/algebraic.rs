//! Algebraic numbers as certified (minimal polynomial, isolating ball) pairs.
//!
//! The minimal polynomial is stored with primitive integer coefficients and
//! positive leading term.  Irreducibility is certified by Rabin's test modulo
//! a budget of small primes — a single prime where the reduction keeps degree
//! and is irreducible proves irreducibility over ℚ.  When no prime certifies,
//! a bounded search for an exact factor (floating root subsets, verified by
//! exact division) can prove reducibility instead; inputs that defeat both
//! are rejected rather than guessed at.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::ball::{cplx, ComplexBall};
use crate::arith::poly::Polynomial;
use crate::arith::rational::Rat;
use crate::arith::roots::{complex_roots, root_error_radius};
use crate::error::{CoreError, Result};

/// Hard cap on admissible algebraic degree.
pub const DEGREE_CAP: usize = 24;

/// A root of an irreducible primitive integer polynomial, isolated by a ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraicNumber {
    min_poly: Polynomial,
    degree: usize,
    ball: ComplexBall,
}

impl AlgebraicNumber {
    /// Certify `poly` as a minimal polynomial and isolate the root nearest to
    /// `approx`.
    pub fn new(poly: &Polynomial, approx: Complex64) -> Result<Self> {
        let degree = match poly.degree() {
            Some(d) if d >= 1 => d,
            _ => {
                return Err(CoreError::domain(
                    "minimal polynomial must be nonconstant".to_string(),
                ))
            }
        };
        if degree > DEGREE_CAP {
            return Err(CoreError::DegreeCap(degree, DEGREE_CAP));
        }
        let (_, ints) = poly.primitive_integer();
        let min_poly = Polynomial::new(ints.iter().cloned().map(Rat::from_integer).collect());

        if degree >= 2 {
            certify_irreducible(&ints)?;
        }

        // Isolate: polish toward the nearest root and demand separation.
        let roots = complex_roots(&min_poly)?;
        if roots.len() != degree {
            return Err(CoreError::InsufficientPrecision(format!(
                "found {} distinct roots for a degree-{} certified-irreducible polynomial",
                roots.len(),
                degree
            )));
        }
        let (&(center, radius), _) = roots
            .iter()
            .map(|rr| (rr, (rr.0 - approx).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("degree >= 1 so at least one root");
        let sep = roots
            .iter()
            .filter(|(z, _)| (*z - center).norm() > 0.0)
            .map(|(z, _)| (*z - center).norm())
            .fold(f64::INFINITY, f64::min);
        if radius * 3.0 >= sep {
            return Err(CoreError::InsufficientPrecision(format!(
                "root ball radius {radius:.3e} does not isolate (separation {sep:.3e})"
            )));
        }
        Ok(AlgebraicNumber {
            min_poly,
            degree,
            ball: ComplexBall::new(center, radius),
        })
    }

    /// The rational r as an algebraic number with minimal polynomial qλ − p.
    pub fn from_rational(r: &Rat) -> Self {
        let min_poly = Polynomial::new(vec![
            Rat::from_integer(-r.numer().clone()),
            Rat::from_integer(r.denom().clone()),
        ]);
        let x = crate::arith::rational::rat_to_f64(r);
        AlgebraicNumber {
            min_poly,
            degree: 1,
            ball: ComplexBall::new(cplx(x, 0.0), x.abs() * 4.0 * f64::EPSILON),
        }
    }

    pub fn min_poly(&self) -> &Polynomial {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ball(&self) -> ComplexBall {
        self.ball
    }

    pub fn approx(&self) -> Complex64 {
        self.ball.center
    }

    /// Absolute logarithmic (Mahler) height:
    /// `(log|a_d| + Σᵢ log⁺|αᵢ|) / d` over all conjugates.
    pub fn mahler_height(&self) -> f64 {
        let (_, ints) = self.min_poly.primitive_integer();
        let lead = ints.last().expect("nonconstant");
        let mut acc = crate::arith::rational::ln_bigint_abs(lead);
        let coeffs: Vec<Complex64> = ints
            .iter()
            .map(|c| cplx(bigint_to_f64_safe(c), 0.0))
            .collect();
        let conjugates = crate::arith::roots::roots_complex_coeffs(&coeffs)
            .expect("finite coefficients by construction");
        for z in conjugates {
            let m = z.norm();
            if m > 1.0 {
                acc += m.ln();
            }
        }
        acc / self.degree as f64
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.min_poly == other.min_poly
            && (self.ball.center - other.ball.center).norm()
                <= self.ball.radius + other.ball.radius + 1e-12
    }
}

fn bigint_to_f64_safe(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        if c.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Primes used for the Rabin certificates.
fn small_primes(limit: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(limit);
    let mut n: u64 = 3;
    while primes.len() < limit {
        if (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0) {
            primes.push(n);
        }
        n += 2;
    }
    primes
}

/// Certify irreducibility over ℚ of a primitive integer polynomial, or prove
/// reducibility by exhibiting a factor.
fn certify_irreducible(ints: &[BigInt]) -> Result<()> {
    let primes = small_primes(25);
    for &p in &primes {
        let big_p = BigInt::from(p);
        if (ints.last().expect("nonconstant") % &big_p).is_zero() {
            continue; // degree drops mod p
        }
        let fp: Vec<u64> = ints
            .iter()
            .map(|c| c.mod_floor(&big_p).to_u64().expect("reduced mod small p"))
            .collect();
        if modp_is_irreducible(&fp, p) {
            return Ok(());
        }
    }
    if let Some(factor) = find_exact_factor(ints) {
        return Err(CoreError::ReducibleMinimalPolynomial(format!(
            "divisible by {factor}"
        )));
    }
    Err(CoreError::UncertifiedIrreducibility(format!(
        "no certificate among {} primes and no exact factor found",
        primes.len()
    )))
}

// --- dense polynomial arithmetic over F_p (p < 2^31, so u64 products fit) ---

fn modp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn modp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    modp_trim(&mut out);
    out
}

fn modp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    modp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = modp_inv(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1;
        let q = (r[k] * lead_inv) % p;
        if q != 0 {
            for j in 0..=dm {
                let sub = (q * m[j]) % p;
                r[k - dm + j] = (r[k - dm + j] + p - sub) % p;
            }
        }
        modp_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn modp_inv(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn modp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut u = a.to_vec();
    let mut v = b.to_vec();
    modp_trim(&mut u);
    modp_trim(&mut v);
    while !v.is_empty() {
        let r = modp_rem(&u, &v, p);
        u = v;
        v = r;
    }
    u
}

fn modp_derivative(a: &[u64], p: u64) -> Vec<u64> {
    let mut out: Vec<u64> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * (k as u64 % p) % p)
        .collect();
    modp_trim(&mut out);
    out
}

/// x^(p^k) mod f via k Frobenius steps of square-and-multiply.
fn modp_frobenius_power(f: &[u64], p: u64, k: usize) -> Vec<u64> {
    let mut t = vec![0u64, 1]; // x
    for _ in 0..k {
        // t <- t^p mod f
        let mut acc = vec![1u64];
        let mut base = t.clone();
        let mut exp = p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = modp_rem(&modp_mul(&acc, &base, p), f, p);
            }
            exp >>= 1;
            if exp > 0 {
                base = modp_rem(&modp_mul(&base, &base, p), f, p);
            }
        }
        t = acc;
    }
    t
}

/// Rabin irreducibility over F_p for a degree ≥ 2 polynomial.
fn modp_is_irreducible(f: &[u64], p: u64) -> bool {
    let mut f = f.to_vec();
    modp_trim(&mut f);
    let n = f.len() - 1;
    if n < 2 {
        return n == 1;
    }
    // Must be squarefree mod p for the test to be meaningful.
    let d = modp_derivative(&f, p);
    if d.is_empty() || modp_gcd(&f, &d, p).len() > 1 {
        return false;
    }
    // x^(p^n) ≡ x (mod f)
    let xpn = modp_frobenius_power(&f, p, n);
    let mut diff = xpn.clone();
    // subtract x
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    modp_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    // gcd(x^(p^(n/q)) − x, f) = 1 for each prime q | n
    let mut m = n;
    let mut prime_divisors = Vec::new();
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            prime_divisors.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        prime_divisors.push(m);
    }
    for q in prime_divisors {
        let mut t = modp_frobenius_power(&f, p, n / q);
        if t.len() < 2 {
            t.resize(2, 0);
        }
        t[1] = (t[1] + p - 1) % p;
        modp_trim(&mut t);
        if t.is_empty() || modp_gcd(&t, &f, p).len() > 1 {
            return false;
        }
    }
    true
}

/// Bounded search for an exact factor: round products of floating-root
/// subsets (scaled by the leading coefficient) and verify by exact division.
/// Only a verified division is reported, so a `Some` answer is a proof.
fn find_exact_factor(ints: &[BigInt]) -> Option<Polynomial> {
    let n = ints.len() - 1;
    if n > 12 {
        return None; // 2^n subsets would be too many; stay honest and abstain
    }
    let poly = Polynomial::new(ints.iter().cloned().map(Rat::from_integer).collect());
    let coeffs: Vec<Complex64> = ints
        .iter()
        .map(|c| cplx(bigint_to_f64_safe(c), 0.0))
        .collect();
    let roots = crate::arith::roots::roots_complex_coeffs(&coeffs).ok()?;
    if roots.iter().any(|z| root_error_radius(&coeffs, *z) > 1e-6) {
        return None;
    }
    let lead = ints.last().expect("nonconstant").clone();
    for mask in 1u32..(1u32 << n) - 1 {
        let size = mask.count_ones() as usize;
        if size > n / 2 {
            continue;
        }
        // Monic product over the subset, then scale by the leading coefficient
        // so an honest factor over ℤ rounds cleanly.
        let mut prod = vec![cplx(1.0, 0.0)];
        for (i, z) in roots.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let mut next = vec![cplx(0.0, 0.0); prod.len() + 1];
                for (k, c) in prod.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * z;
                }
                prod = next;
            }
        }
        let lead_f = bigint_to_f64_safe(&lead);
        let mut candidate = Vec::with_capacity(prod.len());
        let mut plausible = true;
        for c in &prod {
            let scaled = c * lead_f;
            if scaled.im.abs() > 1e-4 || (scaled.re - scaled.re.round()).abs() > 1e-4 {
                plausible = false;
                break;
            }
            candidate.push(Rat::from_integer(BigInt::from(scaled.re.round() as i64)));
        }
        if !plausible {
            continue;
        }
        let candidate = Polynomial::new(candidate);
        if candidate.degree().map_or(true, |d| d == 0) {
            continue;
        }
        if let Ok((_, r)) = poly.div_rem(&candidate) {
            if r.is_zero() {
                let (_, prim) = candidate.primitive_integer();
                return Some(Polynomial::new(
                    prim.into_iter().map(Rat::from_integer).collect(),
                ));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::rat;

    #[test]
    fn golden_ratio_is_certified() {
        let p = Polynomial::from_i64(&[-1, -1, 1]);
        let phi = AlgebraicNumber::new(&p, cplx(1.6, 0.0)).unwrap();
        assert_eq!(phi.degree(), 2);
        // Mahler height of φ: (log 1 + log⁺ φ + log⁺ |1−φ|)/2 = (log φ)/2,
        // since the conjugate 1 − φ has absolute value below one.
        let expected = ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / 2.0;
        assert!((phi.mahler_height() - expected).abs() < 1e-12);
        assert!((phi.approx().re - 1.618033988749895).abs() < 1e-12);
    }

    #[test]
    fn reducible_input_is_rejected_with_proof() {
        // (λ−1)(λ−2) = λ² − 3λ + 2
        let p = Polynomial::from_i64(&[2, -3, 1]);
        let err = AlgebraicNumber::new(&p, cplx(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, CoreError::ReducibleMinimalPolynomial(_)));
        // Non-monic reducible: (2λ−1)(λ+3)
        let p = &Polynomial::from_i64(&[-1, 2]) * &Polynomial::from_i64(&[3, 1]);
        let err = AlgebraicNumber::new(&p, cplx(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, CoreError::ReducibleMinimalPolynomial(_)));
    }

    #[test]
    fn cyclotomic_like_certificates() {
        // λ² + 1 is irreducible mod 3, so certification succeeds.
        let i = AlgebraicNumber::new(&Polynomial::from_i64(&[1, 0, 1]), cplx(0.0, 1.0)).unwrap();
        assert_eq!(i.degree(), 2);
        assert!(i.mahler_height().abs() < 1e-12);
        // λ⁴ + 1 factors mod every prime; the floating search proves nothing
        // (it is irreducible), so construction must refuse honestly.
        let err =
            AlgebraicNumber::new(&Polynomial::from_i64(&[1, 0, 0, 0, 1]), cplx(0.7, 0.7))
                .unwrap_err();
        assert!(matches!(err, CoreError::UncertifiedIrreducibility(_)));
    }

    #[test]
    fn degree_cap_enforced() {
        let p = Polynomial::monomial(rat(1, 1), 25) + Polynomial::from_i64(&[2]);
        let err = AlgebraicNumber::new(&p, cplx(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, CoreError::DegreeCap(25, DEGREE_CAP)));
    }

    #[test]
    fn rational_constructor_and_height() {
        let half = AlgebraicNumber::from_rational(&rat(-7, 2));
        assert_eq!(half.degree(), 1);
        // h(−7/2) = log 7
        assert!((half.mahler_height() - 7.0f64.ln()).abs() < 1e-12);
        assert!((half.approx().re + 3.5).abs() < 1e-14);
    }

    #[test]
    fn rabin_test_agrees_with_known_factorizations() {
        // x² + 1 mod 5 = (x+2)(x+3): reducible.
        assert!(!modp_is_irreducible(&[1, 0, 1], 5));
        // x² + 1 mod 3: irreducible.
        assert!(modp_is_irreducible(&[1, 0, 1], 3));
        // x³ + x + 1 mod 5 (no roots mod 5 ⇒ irreducible for a cubic).
        assert!(modp_is_irreducible(&[1, 1, 0, 1], 5));
        // x³ − x − 1 mod 5 has the root 2, so it must be rejected.
        assert!(!modp_is_irreducible(&[4, 4, 0, 1], 5));
    }
}
