//! Dense univariate polynomials over the exact rationals.
//!
//! Coefficients are stored in ascending degree; the zero polynomial is the
//! empty vector and otherwise the last coefficient is nonzero.  These are the
//! polynomials in the base parameter λ that carry the family coefficients
//! a₄(λ), a₆(λ), section coordinates, discriminants and division polynomials,
//! so everything here is exact.
//!
//! Multiplication clears denominators and convolves integer vectors (big
//! rational reduction per elementary product is far slower), and the gcd is a
//! primitive pseudo-remainder sequence over the integers, which keeps
//! intermediate coefficient growth linear instead of exponential.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::rational::{rat_from_str, rat_to_f64, rat_to_string, Rat};
use crate::error::{CoreError, Result};

/// Dense univariate polynomial over ℚ, ascending-degree coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rat>,
}

impl Polynomial {
    /// Build from ascending-degree coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// The constant polynomial one.
    pub fn one() -> Self {
        Polynomial::constant(Rat::one())
    }

    /// A constant polynomial.
    pub fn constant(c: Rat) -> Self {
        Polynomial::new(vec![c])
    }

    /// The identity polynomial λ.
    pub fn var() -> Self {
        Polynomial::new(vec![Rat::zero(), Rat::one()])
    }

    /// `c·λ^k`.
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Polynomial { coeffs }
    }

    /// Convenience constructor from small integers, ascending degree.
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Polynomial::new(
            coeffs
                .iter()
                .map(|&c| Rat::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Degree with the convention `deg 0 = 0` (handy for height formulas).
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Coefficient of λ^k (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Leading coefficient (zero polynomial yields 0).
    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    /// Ascending-degree coefficient slice.
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Exact evaluation by Horner's rule.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Floating evaluation at a complex argument.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex64::new(rat_to_f64(c), 0.0);
        }
        acc
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rat::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Multiply by a rational scalar.
    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Monic rescaling (zero polynomial stays zero).
    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let lead = self.leading();
        self.scale(&lead.recip())
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Split into a rational content and a primitive integer coefficient
    /// vector with positive leading entry: `self = content · Σ cᵢ λ^i`.
    pub fn primitive_integer(&self) -> (Rat, Vec<BigInt>) {
        if self.is_zero() {
            return (Rat::zero(), Vec::new());
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        if ints.last().map_or(false, |l| l.is_negative()) {
            g = -g;
        }
        for v in ints.iter_mut() {
            *v = &*v / &g;
        }
        (Rat::new(g, den_lcm), ints)
    }

    /// Quotient and remainder with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if d.is_zero() {
            return Err(CoreError::DivisionByZeroPoly);
        }
        let dd = d.degree().expect("nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let lead_inv = d.leading().recip();
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let q = &rem[k] * &lead_inv;
            if !q.is_zero() {
                for j in 0..dd {
                    let delta = &q * &d.coeffs[j];
                    rem[k - dd + j] = &rem[k - dd + j] - delta;
                }
            }
            rem[k] = Rat::zero();
            quot[k - dd] = q;
        }
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// Exact quotient; error if the division leaves a remainder.
    pub fn exact_div(&self, d: &Polynomial) -> Result<Polynomial> {
        let (q, r) = self.div_rem(d)?;
        if !r.is_zero() {
            return Err(CoreError::domain(
                "exact_div called on a non-divisible pair".to_string(),
            ));
        }
        Ok(q)
    }

    /// Greatest common divisor, returned monic.  `gcd(0, b) = monic(b)`.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let (_, mut u) = self.primitive_integer();
        let (_, mut v) = other.primitive_integer();
        if int_degree(&u) < int_degree(&v) {
            std::mem::swap(&mut u, &mut v);
        }
        loop {
            let r = int_prem(&u, &v);
            if r.iter().all(|c| c.is_zero()) {
                let prim = int_primitive(v);
                return Polynomial::new(prim.into_iter().map(Rat::from_integer).collect()).monic();
            }
            u = v;
            v = int_primitive(r);
        }
    }

    /// Least common multiple, monic; zero if either input is zero.
    pub fn lcm(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let g = self.gcd(other);
        let q = self.exact_div(&g).expect("gcd divides");
        (&q * other).monic()
    }

    /// Product of each distinct irreducible factor once: `self/gcd(self, self')`.
    pub fn square_free_part(&self) -> Polynomial {
        if self.is_zero() || self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).expect("gcd divides").monic()
    }

    /// Resultant of two polynomials.
    pub fn resultant(&self, other: &Polynomial) -> Rat {
        let (da, db) = match (self.degree(), other.degree()) {
            (Some(da), Some(db)) => (da, db),
            // Res(0, g) = 0 unless g is a nonzero constant, where the empty
            // Sylvester matrix gives 1; the callers only use nonzero inputs.
            _ => return Rat::zero(),
        };
        if da == 0 && db == 0 {
            return Rat::one();
        }
        let n = da + db;
        let mut m = vec![vec![Rat::zero(); n]; n];
        for row in 0..db {
            for (k, c) in self.coeffs.iter().enumerate() {
                m[row][row + da - k] = c.clone();
            }
        }
        for row in 0..da {
            for (k, c) in other.coeffs.iter().enumerate() {
                m[db + row][row + db - k] = c.clone();
            }
        }
        det_rat(m)
    }

    /// Render with an explicit variable name.
    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coeff = if c.is_one() && k > 0 {
                String::new()
            } else if (-c).is_one() && k > 0 {
                "-".to_string()
            } else if c.denom().is_one() {
                format!("{}", c.numer())
            } else {
                format!("({}/{})", c.numer(), c.denom())
            };
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let sep = if coeff.is_empty() || mono.is_empty() {
                ""
            } else {
                "*"
            };
            terms.push(format!("{coeff}{sep}{mono}"));
        }
        let mut out = String::new();
        for (i, t) in terms.iter().enumerate() {
            if i == 0 {
                out.push_str(t);
            } else if let Some(stripped) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
        out
    }
}

/// Degree of an integer coefficient vector (`-1` encoded as `None`).
fn int_degree(v: &[BigInt]) -> usize {
    let mut d = v.len();
    while d > 0 && v[d - 1].is_zero() {
        d -= 1;
    }
    d.saturating_sub(1)
}

fn int_trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

/// Pseudo-remainder of integer polynomials: `lc(b)^k · a mod b`.
fn int_prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let b = int_trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = int_trim(a.to_vec());
    while r.len() > db {
        let k = r.len() - 1;
        let top = r[k].clone();
        for c in r.iter_mut() {
            *c = &*c * &lead;
        }
        for j in 0..=db {
            let delta = &top * &b[j];
            r[k - db + j] -= delta;
        }
        r = int_trim(r);
        if r.is_empty() {
            break;
        }
    }
    r
}

/// Divide out the integer content, leaving a primitive vector.
fn int_primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let v = int_trim(v);
    if v.is_empty() {
        return v;
    }
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if v.last().expect("nonempty").is_negative() {
        g = -g;
    }
    v.into_iter().map(|c| c / &g).collect()
}

/// Determinant by rational Gaussian elimination with partial pivoting by
/// exact nonzero test (sizes here are small: Sylvester matrices).
fn det_rat(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| !m[r][col].is_zero()) {
            Some(r) => r,
            None => return Rat::zero(),
        };
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = det * &pivot;
        let inv = pivot.recip();
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] = &m[r][c] - delta;
            }
        }
    }
    det
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + rhs.coeff(k));
        }
        Polynomial::new(out)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - rhs.coeff(k));
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        // Convolve primitive integer vectors; big-rational reduction per
        // elementary product dominates the naive implementation.
        let (ca, ia) = self.primitive_integer();
        let (cb, ib) = rhs.primitive_integer();
        let mut conv = vec![BigInt::zero(); ia.len() + ib.len() - 1];
        for (i, a) in ia.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in ib.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                conv[i + j] += a * b;
            }
        }
        let content = ca * cb;
        Polynomial::new(
            conv.into_iter()
                .map(|c| &content * Rat::from_integer(c))
                .collect(),
        )
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_var("x"))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(rat_to_string).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coeffs = strings
            .iter()
            .map(|s| rat_from_str(s))
            .collect::<Result<Vec<Rat>>>()
            .map_err(|e| D::Error::custom(format!("{e}")))?;
        Ok(Polynomial::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::rat;

    fn p(coeffs: &[i64]) -> Polynomial {
        Polynomial::from_i64(coeffs)
    }

    #[test]
    fn construction_trims_trailing_zeros() {
        let q = Polynomial::new(vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(q.degree(), Some(0));
        assert!(Polynomial::new(vec![rat(0, 1)]).is_zero());
    }

    #[test]
    fn arithmetic_identities() {
        let a = p(&[1, -3, 0, 2]);
        let b = p(&[5, 1, -1]);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&a * &Polynomial::one(), a);
        let prod = &a * &b;
        let (q, r) = prod.div_rem(&b).unwrap();
        assert_eq!(q, a);
        assert!(r.is_zero());
    }

    #[test]
    fn gcd_examples() {
        // gcd(λ²−1, λ−1) = λ−1
        assert_eq!(p(&[-1, 0, 1]).gcd(&p(&[-1, 1])), p(&[-1, 1]));
        // gcd(λ, λ+1) = 1
        assert_eq!(p(&[0, 1]).gcd(&p(&[1, 1])), Polynomial::one());
        // gcd(0, λ³) = λ³
        assert_eq!(Polynomial::zero().gcd(&p(&[0, 0, 0, 1])), p(&[0, 0, 0, 1]));
    }

    #[test]
    fn gcd_with_rational_coefficients_is_monic() {
        let a = p(&[-1, 0, 1]).scale(&rat(3, 7));
        let b = p(&[-1, 1]).scale(&rat(-2, 5));
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
    }

    #[test]
    fn resultant_of_linear_pair() {
        // Res(x - a, x - b) = b - a  (for monic linears, up to sign convention
        // Res = ∏ (root_b - root_a)); check against the classical formula
        // Res(f,g) = lc(f)^{deg g} ∏ g(αᵢ).
        let f = p(&[-2, 1]); // x - 2
        let g = p(&[-5, 1]); // x - 5
        assert_eq!(f.resultant(&g), rat(-3, 1)); // g(2) = -3
        // Res(x² + 1, x) = 1  (product of x at roots ±i → (i)(-i) = 1)
        assert_eq!(p(&[1, 0, 1]).resultant(&p(&[0, 1])), rat(1, 1));
    }

    #[test]
    fn square_free_part_strips_multiplicity() {
        let f = &p(&[-1, 1]).pow(3) * &p(&[0, 1]);
        assert_eq!(f.square_free_part(), &p(&[-1, 1]) * &p(&[0, 1]));
    }

    #[test]
    fn serde_round_trip_matches_ascending_degree_contract() {
        let q = Polynomial::new(vec![rat(0, 1), rat(-3, 2), rat(1, 1)]);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "[\"0/1\",\"-3/2\",\"1/1\"]");
        let back: Polynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        // The unicode minus from the wire format is accepted too.
        let wire: Polynomial = serde_json::from_str("[\"0/1\",\"\u{2212}3/2\",\"1/1\"]").unwrap();
        assert_eq!(wire, q);
    }

    #[test]
    fn evaluation_and_derivative() {
        let f = p(&[1, 2, 3]); // 3λ² + 2λ + 1
        assert_eq!(f.eval(&rat(2, 1)), rat(17, 1));
        assert_eq!(f.derivative(), p(&[2, 6]));
    }
}
