//! Exact group-law invariants across the family layer: associativity,
//! multiplication composition, compatibility of specialization with the
//! group operations, and torsion-order detection.

use heightlab_core::arith::poly::Polynomial;
use heightlab_core::arith::ratfunc::RationalFunction;
use heightlab_core::arith::rational::rat;
use heightlab_core::family::{torsion_order_upto, FamilyPoint, WeierstrassFamily};

/// Constant-coefficient family y² = x³ − x + 1 (used as a single curve).
fn single_curve() -> WeierstrassFamily {
    WeierstrassFamily::from_polys(
        "minus-x-plus-one",
        Polynomial::from_i64(&[-1]),
        Polynomial::from_i64(&[1]),
    )
    .unwrap()
}

/// The quartic pencil y² = x³ + λ⁴ − λ³ with its section (λ, λ²).
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

#[test]
fn group_law_is_exactly_associative_and_commutative() {
    let fam = single_curve();
    let lam = rat(0, 1);
    let p = fam.fiber_point(lam.clone(), rat(1, 1), rat(1, 1)).unwrap();
    let q = fam.fiber_point(lam.clone(), rat(0, 1), rat(1, 1)).unwrap();
    let r = fam.fiber_point(lam.clone(), rat(-1, 1), rat(1, 1)).unwrap();

    assert_eq!(
        fam.group_add(&p, &q).unwrap(),
        fam.group_add(&q, &p).unwrap()
    );
    let lhs = fam
        .group_add(&fam.group_add(&p, &q).unwrap(), &r)
        .unwrap();
    let rhs = fam
        .group_add(&p, &fam.group_add(&q, &r).unwrap())
        .unwrap();
    assert_eq!(lhs, rhs);

    // Inverses cancel exactly.
    let neg = fam.negate(&p);
    assert!(fam.group_add(&p, &neg).unwrap().is_zero());
}

#[test]
fn multiplication_composes_exactly() {
    let fam = single_curve();
    let p = fam
        .fiber_point(rat(0, 1), rat(1, 1), rat(1, 1))
        .unwrap();
    let m6 = fam.multiply(&p, 6).unwrap();
    let m2_of_3 = fam
        .multiply(&fam.multiply(&p, 3).unwrap(), 2)
        .unwrap();
    let m3_of_2 = fam
        .multiply(&fam.multiply(&p, 2).unwrap(), 3)
        .unwrap();
    assert_eq!(m6, m2_of_3);
    assert_eq!(m6, m3_of_2);

    // Negative multiples are the negations of the positive ones.
    assert_eq!(
        fam.multiply(&p, -5).unwrap(),
        fam.negate(&fam.multiply(&p, 5).unwrap())
    );

    // Repeated addition agrees with the double-and-add ladder.
    let mut acc = FamilyPoint::zero_at(rat(0, 1));
    for n in 0..=9i64 {
        assert_eq!(fam.multiply(&p, n).unwrap(), acc, "n = {n}");
        acc = fam.group_add(&acc, &p).unwrap();
    }
}

#[test]
fn specialization_commutes_with_the_group_operations() {
    let (fam, sec) = quartic_with_section();
    for lam in [rat(2, 1), rat(3, 1), rat(-2, 1), rat(5, 2), rat(7, 3)] {
        for n in [2i64, 3, 5] {
            let mult_then_spec = fam
                .specialize(&fam.multiply(&sec, n).unwrap(), &lam)
                .unwrap();
            let spec_then_mult = fam
                .multiply(&fam.specialize(&sec, &lam).unwrap(), n)
                .unwrap();
            assert_eq!(mult_then_spec, spec_then_mult, "λ = {lam}, n = {n}");
        }
        // Addition of distinct sections: P and [2]P.
        let double = fam.multiply(&sec, 2).unwrap();
        let add_then_spec = fam
            .specialize(&fam.group_add(&sec, &double).unwrap(), &lam)
            .unwrap();
        let spec_then_add = fam
            .group_add(
                &fam.specialize(&sec, &lam).unwrap(),
                &fam.specialize(&double, &lam).unwrap(),
            )
            .unwrap();
        assert_eq!(add_then_spec, spec_then_add, "λ = {lam}");
    }
}

#[test]
fn torsion_orders_are_detected_exactly() {
    // The zero section has order 1.
    let (fam, sec) = quartic_with_section();
    assert_eq!(
        torsion_order_upto(&fam, &FamilyPoint::zero_section(), 8).unwrap(),
        Some(1)
    );
    // The quartic section is non-torsion.
    assert_eq!(torsion_order_upto(&fam, &sec, 12).unwrap(), None);

    // A 2-torsion section of the Legendre pencil: x = −(λ+1)/3, y = 0.
    let leg = WeierstrassFamily::legendre();
    let x = RationalFunction::from_poly(Polynomial::new(vec![rat(-1, 3), rat(-1, 3)]));
    let two_torsion = leg.section(x, RationalFunction::zero()).unwrap();
    assert_eq!(torsion_order_upto(&leg, &two_torsion, 8).unwrap(), Some(2));

    // Doubling it gives the zero section exactly.
    assert!(leg.multiply(&two_torsion, 2).unwrap().is_zero());
}
