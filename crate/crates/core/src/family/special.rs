//! Torsion detection and generically-special sections.
//!
//! Torsion order is found by specializing to one good fiber — in
//! characteristic zero the specialization map is injective on torsion at
//! every smooth fiber, so the fiber order is the section order — and then the
//! candidate order is verified symbolically by an exact [m]·P computation
//! over ℚ(λ).  A fiber point of infinite order has no order ≤ the bound, and
//! the scan concludes non-torsion without any symbolic work.

use serde::{Deserialize, Serialize};

use crate::arith::rational::{rat, Rat};
use crate::arith::ratfunc::RationalFunction;
use crate::error::{CoreError, Result};
use crate::family::point::FamilyPoint;
use crate::family::WeierstrassFamily;

/// Default search bound for torsion orders.
pub const DEFAULT_TORSION_BOUND: usize = 64;

/// Records j(λ) and whether it is constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotrivialityCertificate {
    pub j_invariant: RationalFunction,
    pub is_isotrivial: bool,
}

/// Candidate good fibers for the specialization scan: small rationals mixed
/// with non-integers, enough to dodge any finite set of bad λ.
fn candidate_fibers() -> impl Iterator<Item = Rat> {
    (2i64..200).map(|k| match k % 3 {
        0 => rat(k, 1),
        1 => rat(2 * k + 1, 2),
        _ => rat(3 * k + 1, 5),
    })
}

/// Order of the section as a torsion element, if it is ≤ `nmax`; `None`
/// means the section is non-torsion (no order ≤ `nmax` exists, and for a
/// verified candidate the exact symbolic check failed).
pub fn torsion_order_upto(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    nmax: usize,
) -> Result<Option<usize>> {
    if section.is_zero() {
        return Ok(Some(1));
    }
    match section {
        FamilyPoint::Fiber { .. } => {
            // A plain fiber point: scan the cyclic multiples directly.
            fiber_order_upto(family, section, nmax)
        }
        FamilyPoint::Section { .. } => {
            // Pick one good fiber where the section specializes.
            for lambda in candidate_fibers() {
                if !family.is_good_fiber(&lambda) {
                    continue;
                }
                let sp = match family.specialize(section, &lambda) {
                    Ok(sp) => sp,
                    Err(CoreError::SectionUndefined) => continue,
                    Err(e) => return Err(e),
                };
                let fiber_order = fiber_order_upto(family, &sp, nmax)?;
                return match fiber_order {
                    None => Ok(None),
                    Some(m) => {
                        // Torsion specializes injectively on good fibers, so
                        // m is the only possible order; verify it exactly in
                        // the generic group.
                        let mp = family.multiply(section, m as i64)?;
                        Ok(if mp.is_zero() { Some(m) } else { None })
                    }
                };
            }
            Err(CoreError::domain(
                "no good specialization fiber found among candidates".to_string(),
            ))
        }
        FamilyPoint::Zero { .. } => Ok(Some(1)),
    }
}

/// Smallest m ≤ nmax with [m]·point = O, by repeated addition.
fn fiber_order_upto(
    family: &WeierstrassFamily,
    point: &FamilyPoint,
    nmax: usize,
) -> Result<Option<usize>> {
    let mut acc = point.clone(); // [m]·point at the top of iteration m
    for m in 1..=nmax {
        if acc.is_zero() {
            return Ok(Some(m));
        }
        acc = family.group_add(&acc, point)?;
    }
    Ok(None)
}

/// A section is generically special exactly when it is torsion or its
/// function-field canonical height vanishes.  Families with constant
/// j-invariant can carry a nontrivial trace, which this code does not
/// analyze; they are refused.
pub fn is_generically_special(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    nmax: usize,
) -> Result<bool> {
    if family.isotriviality().is_isotrivial {
        return Err(CoreError::IsotrivialFamily);
    }
    if torsion_order_upto(family, section, nmax)?.is_some() {
        return Ok(true);
    }
    // Non-torsion: on a non-isotrivial family the only other special case is
    // exact height zero, which the exact descent detects.
    let hk = crate::canonical::canonical_height_k(family, section, 4)?;
    Ok(hk.exact && hk.value_is_zero())
}
