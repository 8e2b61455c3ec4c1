//! Property tests for the exact kernel: progression arithmetic, affine maps
//! as partial functions on indices, and the operator ring axioms checked on
//! windows.

use num_complex::Complex64;
use opword::kernel::{AffineInjection, Progression, StructuredOperator};
use proptest::prelude::*;

fn entry_strategy() -> impl Strategy<Value = (u64, u64, Complex64)> {
    (1..12u64, 1..12u64, -100..=100i32, -100..=100i32)
        .prop_map(|(r, c, re, im)| (r, c, Complex64::new(re as f64 / 128.0, im as f64 / 128.0)))
}

/// Dense block, optional diagonal tail on a progression, optionally twisted
/// by one of the isometries so tails with nontrivial index maps show up.
fn operator_strategy() -> impl Strategy<Value = StructuredOperator> {
    (
        proptest::collection::vec(entry_strategy(), 0..6),
        proptest::option::of((13..20u64, 1..4u64, -100..=100i32, -100..=100i32)),
        0..4u8,
    )
        .prop_map(|(entries, tail, twist)| {
            let mut op = StructuredOperator::from_entries(entries);
            if let Some((start, modulus, re, im)) = tail {
                let weight = Complex64::new(re as f64 / 128.0, im as f64 / 128.0);
                op = op
                    .add(&StructuredOperator::tail_on(Progression::new(start, modulus), weight))
                    .expect("tail add stays representable");
            }
            match twist {
                0 => op,
                1 => op.mul(&StructuredOperator::shift()).expect("product"),
                2 => StructuredOperator::dyadic().mul(&op).expect("product"),
                _ => op.mul(&StructuredOperator::shift().adjoint()).expect("product"),
            }
        })
}

proptest! {
    #[test]
    fn progression_intersection_matches_membership(
        s1 in 1..30u64, m1 in 1..8u64, s2 in 1..30u64, m2 in 1..8u64,
    ) {
        let p = Progression::new(s1, m1);
        let q = Progression::new(s2, m2);
        let meet = p.intersect(&q);
        for i in 1..=240 {
            prop_assert_eq!(meet.contains(i), p.contains(i) && q.contains(i));
        }
    }

    #[test]
    fn affine_maps_compose_pointwise(
        s1 in 1..12u64, m1 in 1..5u64, a1 in 1..4u64, b1 in -6..12i64, d1 in 1..4u64,
        s2 in 1..12u64, m2 in 1..5u64, a2 in 1..4u64, b2 in -6..12i64, d2 in 1..4u64,
    ) {
        let f = AffineInjection::new(Progression::new(s1, m1), a1, b1, d1);
        let g = AffineInjection::new(Progression::new(s2, m2), a2, b2, d2);
        prop_assume!(f.is_ok() && g.is_ok());
        let (f, g) = (f.unwrap(), g.unwrap());
        let fg = f.compose(&g).unwrap();
        for i in 1..=200u64 {
            let through = g.apply(i).and_then(|mid| f.apply(mid));
            let direct = fg.as_ref().and_then(|h| h.apply(i));
            prop_assert_eq!(direct, through);
        }
    }

    #[test]
    fn affine_inversion_is_pointwise_inverse(
        s in 1..12u64, m in 1..5u64, a in 1..4u64, b in -6..12i64, d in 1..4u64,
    ) {
        let f = AffineInjection::new(Progression::new(s, m), a, b, d);
        prop_assume!(f.is_ok());
        let f = f.unwrap();
        let inv = f.invert();
        for i in 1..=200u64 {
            if let Some(j) = f.apply(i) {
                prop_assert_eq!(inv.apply(j), Some(i));
            }
        }
        for j in 1..=200u64 {
            if inv.apply(j).is_some() {
                prop_assert!(f.image().contains(j));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_is_associative_on_windows(
        a in operator_strategy(), b in operator_strategy(), c in operator_strategy(),
    ) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.window_residual(&right, 64) <= 1e-10);
    }

    #[test]
    fn ring_distributes_on_windows(
        a in operator_strategy(), b in operator_strategy(), c in operator_strategy(),
    ) {
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(left.window_residual(&right, 64) <= 1e-10);
    }

    #[test]
    fn adjoint_reverses_products(a in operator_strategy(), b in operator_strategy()) {
        let left = a.mul(&b).unwrap().adjoint();
        let right = b.adjoint().mul(&a.adjoint()).unwrap();
        prop_assert!(left.window_residual(&right, 64) <= 1e-12);
        prop_assert!(a.adjoint().adjoint().window_eq(&a, 64, 0.0));
    }
}
