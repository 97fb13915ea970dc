//! Property tests for the height functions: projective invariance, the
//! closed forms on coprime representatives, and ball containment.

use heightlab_core::arith::ball::{cplx, ComplexBall};
use heightlab_core::arith::poly::Polynomial;
use heightlab_core::arith::ratfunc::RationalFunction;
use heightlab_core::arith::rational::{rat, Rat};
use heightlab_core::heights::{
    fiber_naive_height, weil_height_k, weil_height_q, ProjectivePointK, ProjectivePointQ,
};
use num_traits::Zero;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=24).prop_map(|(p, q)| rat(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    (prop_oneof![-40i64..=-1, 1i64..=40], 1i64..=24).prop_map(|(p, q)| rat(p, q))
}

fn small_poly(max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-9i64..=9, 1..=max_deg + 1)
        .prop_map(|c| Polynomial::from_i64(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weil_height_q_is_projectively_invariant(
        coords in prop::collection::vec(small_rat(), 2..=4),
        k in nonzero_rat(),
    ) {
        prop_assume!(coords.iter().any(|c| !c.is_zero()));
        let p = ProjectivePointQ { coords: coords.clone() };
        let scaled = ProjectivePointQ {
            coords: coords.iter().map(|c| c * &k).collect(),
        };
        let h1 = weil_height_q(&p).unwrap();
        let h2 = weil_height_q(&scaled).unwrap();
        prop_assert!((h1 - h2).abs() < 1e-12, "h = {h1} vs {h2}");
        prop_assert!(h1 >= 0.0);
    }

    #[test]
    fn weil_height_q_matches_log_max_on_coprime_pairs(p in -400i64..=400, q in 1i64..=400) {
        prop_assume!(p != 0);
        let g = num_integer::gcd(p.abs(), q);
        let (pr, qr) = (p / g, q / g);
        let point = ProjectivePointQ { coords: vec![rat(p, q), rat(1, 1)] };
        let expect = (pr.abs().max(qr.abs()) as f64).ln();
        let h = weil_height_q(&point).unwrap();
        prop_assert!((h - expect).abs() < 1e-12, "h = {h}, expected {expect}");
    }

    #[test]
    fn fiber_naive_height_is_half_the_projective_height(x in small_rat()) {
        let h = fiber_naive_height(Some(&x));
        let p = ProjectivePointQ { coords: vec![x, rat(1, 1)] };
        prop_assert!((h - 0.5 * weil_height_q(&p).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn function_field_height_equals_the_degree(f in small_poly(5)) {
        prop_assume!(!f.is_zero());
        let deg = f.degree().unwrap();
        let point = ProjectivePointK {
            coords: vec![RationalFunction::from_poly(f), RationalFunction::one()],
        };
        prop_assert_eq!(weil_height_k(&point).unwrap(), deg);
    }

    #[test]
    fn function_field_height_is_projectively_invariant(
        f in small_poly(4),
        g_num in small_poly(3),
        g_den in small_poly(3),
    ) {
        prop_assume!(!f.is_zero() && !g_num.is_zero() && !g_den.is_zero());
        let g = RationalFunction::new(g_num, g_den).unwrap();
        prop_assume!(!g.is_zero());
        let x = RationalFunction::from_poly(f);
        let p = ProjectivePointK { coords: vec![x.clone(), RationalFunction::one()] };
        let scaled = ProjectivePointK { coords: vec![&x * &g, g] };
        prop_assert_eq!(weil_height_k(&p).unwrap(), weil_height_k(&scaled).unwrap());
    }

    #[test]
    fn ball_arithmetic_contains_the_exact_values(
        (ar, ai, br, bi) in (-50i32..=50, -50i32..=50, -50i32..=50, -50i32..=50),
        (ra, rb) in (0.0f64..1e-3, 0.0f64..1e-3),
    ) {
        let a = cplx(ar as f64 / 8.0, ai as f64 / 8.0);
        let b = cplx(br as f64 / 8.0, bi as f64 / 8.0);
        let ba = ComplexBall::new(a, ra);
        let bb = ComplexBall::new(b, rb);
        // The exact value of each operation on the centers must stay inside
        // the result ball whatever the input radii.
        prop_assert!(ba.add(&bb).contains(a + b));
        prop_assert!(ba.sub(&bb).contains(a - b));
        prop_assert!(ba.mul(&bb).contains(a * b));
        if bb.mag_lower() > 0.0 {
            prop_assert!(ba.div(&bb).unwrap().contains(a / b));
        }
    }
}
