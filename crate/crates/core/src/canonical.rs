//! Néron–Tate canonical heights by the doubling limit, over ℚ on a fiber and
//! over ℚ(λ) for sections.
//!
//! Over ℚ the x-coordinate is tracked as a coprime integer pair acted on by
//! the duplication forms; after each step the pair is re-reduced by a gcd
//! with a fixed resultant constant of the curve, which is the only place a
//! common factor can hide, so the reduction costs one short division per
//! step instead of a full big-integer gcd.  The height `ĥ = ½·lim
//! h(x([2ⁿ]P))/4ⁿ` is normalized against the zero-section divisor class,
//! matching [`crate::heights::fiber_naive_height`].
//!
//! Over ℚ(λ) degrees are exact integers, the estimates are exact rationals,
//! and stabilized degree defects certify the limit exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::poly::Polynomial;
use crate::arith::rational::{ln_biguint, rat, rat_to_f64, Rat};
use crate::arith::ratfunc::RationalFunction;
use crate::error::{CoreError, Result};
use crate::family::{torsion_order_upto, FamilyPoint, WeierstrassFamily, DEFAULT_TORSION_BOUND};
use crate::heights::{base_height, fiber_naive_height};

/// Outcome of the doubling limit over ℚ.  `estimates[n]` is
/// `h(x([2ⁿ]P)) / (2·4ⁿ)`; there are `iterations + 1` of them.
/// `tail_bound` bounds `|value − ĥ|` under the (safety-margined, observed)
/// bound on the per-doubling defect `h(x([2ⁿ]P)) − 4·h(x([2ⁿ⁻¹]P))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TateLimitResult {
    pub value: f64,
    pub iterations: usize,
    pub tail_bound: f64,
    pub estimates: Vec<f64>,
}

/// Outcome of the doubling limit over ℚ(λ): estimates are exact rationals,
/// and `exact` records whether the degree defects certified the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFieldHeightResult {
    pub value: Rat,
    pub iterations: usize,
    pub exact: bool,
}

impl FunctionFieldHeightResult {
    pub fn value_is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn value_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

/// Hard iteration cap for the ℚ-ladder.
const MAX_DOUBLINGS_Q: usize = 16;
/// Abort if the tracked integers exceed this many nats (≈ 18 MB).
const LADDER_SIZE_CAP_NATS: f64 = 1e8;
/// Reduced-degree budget for the ℚ(λ)-ladder.
const DEGREE_BUDGET_K: usize = 6000;

/// Canonical height of a specialized point, via the Tate limit on its fiber.
pub fn canonical_height_q(
    family: &WeierstrassFamily,
    point: &FamilyPoint,
    tol: f64,
) -> Result<TateLimitResult> {
    match point {
        FamilyPoint::Zero { .. } => Ok(trivial_limit()),
        FamilyPoint::Fiber { lambda, x, .. } => {
            let (a4, a6) = family.coeffs_at(lambda)?;
            canonical_height_curve(&a4, &a6, x, tol)
        }
        FamilyPoint::Section { .. } => Err(CoreError::domain(
            "canonical_height_q expects a specialized point; specialize the section first"
                .to_string(),
        )),
    }
}

fn trivial_limit() -> TateLimitResult {
    TateLimitResult {
        value: 0.0,
        iterations: 0,
        tail_bound: 0.0,
        estimates: vec![0.0],
    }
}

/// Canonical height of (x, ·) on `y² = x³ + a₄x + a₆` over ℚ.  Only the
/// x-coordinate matters: the doubling orbit of x is y-free.
pub fn canonical_height_curve(a4: &Rat, a6: &Rat, x: &Rat, tol: f64) -> Result<TateLimitResult> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(CoreError::domain("tolerance must be positive".to_string()));
    }
    // Integral model: u = lcm of coefficient denominators, (a₄, a₆, x) ↦
    // (u⁴a₄, u⁶a₆, u²x).  The canonical height is a model invariant.
    let u = a4.denom().lcm(a6.denom());
    let a4i = (a4 * Rat::from_integer(u.pow(4))).to_integer();
    let a6i = (a6 * Rat::from_integer(u.pow(6))).to_integer();
    let x0 = x * Rat::from_integer(u.pow(2));

    let cleanup = cleanup_modulus(&a4i, &a6i)?;
    let mut a = x0.numer().clone();
    let mut b = x0.denom().clone();

    let mut h_prev = pair_height(&a, &b);
    let mut estimates = vec![h_prev / 2.0];
    // The per-doubling defect cₙ = hₙ − 4hₙ₋₁ is bounded by a constant of
    // the curve but need not decay, so the tail of the limit after step n
    // is controlled by sup|c| / (6·4ⁿ), not by the last difference.  Track
    // the largest observed defect (with a floor and a 1.5× safety margin)
    // and stop once the resulting tail bound is inside the tolerance.
    let mut defect_max = 0.7f64;

    for n in 1..=MAX_DOUBLINGS_Q {
        let (fa, gb) = duplication_forms(&a, &b, &a4i, &a6i);
        if gb.is_zero() {
            // [2ⁿ⁻¹]P is 2-torsion: the point is torsion and ĥ = 0 exactly.
            estimates.push(0.0);
            return Ok(TateLimitResult {
                value: 0.0,
                iterations: n,
                tail_bound: 0.0,
                estimates,
            });
        }
        // gcd(F, G) divides the cleanup modulus, so reducing against it
        // restores coprimality with one short division each.
        let g = (fa.mod_floor(&cleanup).gcd(&cleanup))
            .gcd(&gb.mod_floor(&cleanup).gcd(&cleanup));
        a = fa / &g;
        b = gb / &g;

        let h = pair_height(&a, &b);
        if h > LADDER_SIZE_CAP_NATS {
            return Err(CoreError::NonConvergent(format!(
                "ladder integers exceeded the size budget at doubling {n}; estimates so far: {estimates:?}"
            )));
        }
        let scale = 4f64.powi(n as i32);
        let est = h / (2.0 * scale);
        estimates.push(est);
        defect_max = defect_max.max((h - 4.0 * h_prev).abs());
        h_prev = h;

        let tail = 1.5 * defect_max / (6.0 * scale);
        if n >= 4 && tail <= tol {
            return Ok(TateLimitResult {
                value: est,
                iterations: n,
                tail_bound: tail,
                estimates,
            });
        }
    }
    Err(CoreError::NonConvergent(format!(
        "tolerance {tol:.1e} not reached after {MAX_DOUBLINGS_Q} doublings; estimates: {estimates:?}"
    )))
}

fn pair_height(a: &BigInt, b: &BigInt) -> f64 {
    let ma = a.magnitude();
    let mb = b.magnitude();
    ln_biguint(ma.max(mb))
}

/// Numerator and denominator of x([2]P) from x(P) = A/B on the integral
/// model: F = A⁴ − 2a₄A²B² − 8a₆AB³ + a₄²B⁴ and G = 4B(A³ + a₄AB² + a₆B³).
fn duplication_forms(a: &BigInt, b: &BigInt, a4: &BigInt, a6: &BigInt) -> (BigInt, BigInt) {
    let a2 = a * a;
    let b2 = b * b;
    let a2b2 = &a2 * &b2;
    let b3 = &b2 * b;
    let ab3 = a * &b3;
    let f = &a2 * &a2 - BigInt::from(2) * a4 * &a2b2 - BigInt::from(8) * a6 * &ab3
        + a4 * a4 * (&b2 * &b2);
    let g = BigInt::from(4) * b * (&a2 * a + a4 * a * &b2 + a6 * &b3);
    (f, g)
}

/// Fixed modulus divisible by every possible gcd of the duplication forms at
/// coprime arguments: the product of the resultants eliminating each
/// projective variable.  Vanishes only on singular curves.
fn cleanup_modulus(a4: &BigInt, a6: &BigInt) -> Result<BigInt> {
    let a4r = Rat::from_integer(a4.clone());
    let a6r = Rat::from_integer(a6.clone());
    let f = Polynomial::new(vec![
        &a4r * &a4r,
        rat(-8, 1) * &a6r,
        rat(-2, 1) * &a4r,
        rat(0, 1),
        rat(1, 1),
    ]);
    let g = Polynomial::new(vec![
        rat(4, 1) * &a6r,
        rat(4, 1) * &a4r,
        rat(0, 1),
        rat(4, 1),
    ]);
    // Reversed forms eliminate the other variable.
    let fs = Polynomial::new(vec![
        rat(1, 1),
        rat(0, 1),
        rat(-2, 1) * &a4r,
        rat(-8, 1) * &a6r,
        &a4r * &a4r,
    ]);
    let gs = Polynomial::new(vec![
        rat(0, 1),
        rat(4, 1),
        rat(0, 1),
        rat(4, 1) * &a4r,
        rat(4, 1) * &a6r,
    ]);
    let r1 = f.resultant(&g);
    let r2 = fs.resultant(&gs);
    let product = (r1 * r2).to_integer().abs();
    if product.is_zero() {
        return Err(CoreError::SingularFamily(
            "duplication resultant vanishes: the fiber is singular".to_string(),
        ));
    }
    Ok(product)
}

/// x-coordinate of [2]Q from x(Q) over ℚ(λ).
fn duplicate_x_k(family: &WeierstrassFamily, x: &RationalFunction) -> Result<RationalFunction> {
    let a4 = family.a4();
    let a6 = family.a6();
    let x2 = x * x;
    let num = &(&(&x2 - a4) * &(&x2 - a4)) - &(a6 * x).scale_rat(&rat(8, 1));
    let den = (&(&(&x2 * x) + &(a4 * x)) + a6).scale_rat(&rat(4, 1));
    if den.is_zero() {
        return Err(CoreError::domain(
            "doubling a 2-torsion section has no x-image".to_string(),
        ));
    }
    Ok(&num / &den)
}

/// Canonical height of a section over ℚ(λ) by the degree-doubling limit.
/// Torsion sections are exactly zero.  Otherwise the defect sequence
/// `δₙ = deg x([2ⁿ]P) − 4·deg x([2ⁿ⁻¹]P)` is watched: once three
/// consecutive defects agree, the degrees follow
/// `deg_{n+k} = 4ᵏ·deg_n + δ·(4ᵏ−1)/3` and the limit is summed exactly to
/// `(3·deg_n + δ) / (6·4ⁿ)`.  (The defect is eventually periodic for these
/// ladders; a constant run of three is taken as evidence of period one, and
/// the result is marked exact.)  Sections whose defects keep moving come
/// back inexact, with the last raw estimate.
pub fn canonical_height_k(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    max_doublings: usize,
) -> Result<FunctionFieldHeightResult> {
    if max_doublings > 6 {
        return Err(CoreError::DegreeOverflow);
    }
    match section {
        FamilyPoint::Zero { .. } => Ok(FunctionFieldHeightResult {
            value: Rat::zero(),
            iterations: 0,
            exact: true,
        }),
        FamilyPoint::Fiber { .. } => Err(CoreError::domain(
            "canonical_height_k expects a section over ℚ(λ), not a fiber point".to_string(),
        )),
        FamilyPoint::Section { x, .. } => {
            if torsion_order_upto(family, section, DEFAULT_TORSION_BOUND)?.is_some() {
                return Ok(FunctionFieldHeightResult {
                    value: Rat::zero(),
                    iterations: 0,
                    exact: true,
                });
            }
            let mut cur = x.clone();
            let mut degs: Vec<i64> = vec![cur.map_degree() as i64];
            for n in 1..=max_doublings {
                cur = duplicate_x_k(family, &cur)?;
                let d = cur.map_degree();
                if d > DEGREE_BUDGET_K {
                    return Err(CoreError::DegreeOverflow);
                }
                degs.push(d as i64);
                if n >= 3 {
                    let d0 = degs[n] - 4 * degs[n - 1];
                    let d1 = degs[n - 1] - 4 * degs[n - 2];
                    let d2 = degs[n - 2] - 4 * degs[n - 3];
                    let value = Rat::new(
                        (3 * degs[n] + d0).into(),
                        BigInt::from(6) * BigInt::from(4).pow(n as u32),
                    );
                    if d0 == d1 && d1 == d2 && !value.is_negative() {
                        return Ok(FunctionFieldHeightResult {
                            value,
                            iterations: n,
                            exact: true,
                        });
                    }
                }
            }
            let n = degs.len() - 1;
            Ok(FunctionFieldHeightResult {
                value: Rat::new(
                    degs[n].into(),
                    BigInt::from(2) * BigInt::from(4).pow(n as u32),
                ),
                iterations: n,
                exact: false,
            })
        }
    }
}

/// Empirical Silverman–Tate constant over a sample of fibers:
/// `max |ĥ(P_λ) − h_naive(P_λ)| / (1 + h_S(λ))`.
pub fn silverman_tate_constant(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    samples: &[Rat],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(CoreError::domain(
            "empty sample list for the Silverman–Tate constant".to_string(),
        ));
    }
    let mut worst: f64 = 0.0;
    for lambda in samples {
        let sp = family.specialize(section, lambda)?;
        // 10⁻⁴ on each ĥ is far below the O(1) differences this constant
        // measures, and keeps the ladders short on fibers with large
        // cleanup moduli.
        let nt = canonical_height_q(family, &sp, 1e-4)?;
        let hb = base_height(family, lambda)?;
        let hn = fiber_naive_height(sp.fiber_x()) + hb;
        worst = worst.max((nt.value - hn).abs() / (1.0 + hb));
    }
    Ok(worst)
}
