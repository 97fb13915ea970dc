//! λ-sample generation: Farey fractions up to a height bound, seeded random
//! rationals, and explicit lists — always filtered away from singular
//! fibers.

use anyhow::{bail, Result};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heightlab_core::arith::rational::{rat, Rat};
use heightlab_core::family::WeierstrassFamily;

use crate::config::{parse_rat, SamplingRule};

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// All fractions p/q with q ≥ 1, gcd(p, q) = 1, max(|p|, q) ≤ max_height,
/// lying in [lo, hi], sorted increasing.
pub fn farey_rationals(max_height: u64, lo: &Rat, hi: &Rat) -> Vec<Rat> {
    let mut out: Vec<Rat> = Vec::new();
    if max_height == 0 || lo > hi {
        return out;
    }
    let h = max_height as i64;
    for q in 1..=h {
        // p/q ∈ [lo, hi] ⟺ p ∈ [lo·q, hi·q].
        let lo_q = lo * rat(q, 1);
        let hi_q = hi * rat(q, 1);
        let p_min = lo_q.ceil().to_integer();
        let p_max = hi_q.floor().to_integer();
        let mut p = p_min.clone();
        while p <= p_max {
            if let Ok(pi) = i64::try_from(&p) {
                if pi.unsigned_abs() <= max_height
                    && gcd_u64(pi.unsigned_abs(), q as u64) == 1
                {
                    out.push(rat(pi, q));
                }
            }
            p += BigInt::from(1);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `count` random rationals with |numerator| ≤ num_bound and
/// 1 ≤ denominator ≤ den_bound, deterministically from the seed.
pub fn random_rationals(count: usize, num_bound: i64, den_bound: i64, seed: u64) -> Vec<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = num_bound.max(1);
    let db = den_bound.max(1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.gen_range(-nb..=nb);
        let q = rng.gen_range(1..=db);
        out.push(rat(p, q));
    }
    out
}

/// Generate samples for a rule, keeping only good fibers of the family.
pub fn generate(
    rule: &SamplingRule,
    family: &WeierstrassFamily,
    seed: u64,
) -> Result<Vec<Rat>> {
    let raw: Vec<Rat> = match rule {
        SamplingRule::List { values } => {
            let parsed: Result<Vec<Rat>> = values.iter().map(|s| parse_rat(s)).collect();
            parsed?
        }
        SamplingRule::Farey { max_height, lo, hi } => {
            let lo = parse_rat(lo)?;
            let hi = parse_rat(hi)?;
            farey_rationals(*max_height, &lo, &hi)
        }
        SamplingRule::Random {
            count,
            num_bound,
            den_bound,
        } => random_rationals(*count, *num_bound, *den_bound, seed),
    };
    let kept: Vec<Rat> = raw
        .into_iter()
        .filter(|l| family.is_good_fiber(l))
        .collect();
    if kept.is_empty() {
        bail!("sampling rule produced no λ on good fibers");
    }
    Ok(kept)
}
