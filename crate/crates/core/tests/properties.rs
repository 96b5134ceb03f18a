use ltk::laurent::SeriesRing;
use ltk::theta::ThetaStructure;
use ltk::witt::{FiniteField, WittElem, WittRing};
use proptest::prelude::*;

fn w38() -> WittRing {
    WittRing::new(FiniteField::extension(2, 3).unwrap(), 3).unwrap()
}

fn elem(r: &WittRing, c: &[i64]) -> WittElem {
    r.from_coeffs(c).unwrap()
}

fn digits() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..8, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn witt_ring_axioms(a in digits(), b in digits(), c in digits()) {
        let r = w38();
        let (a, b, c) = (elem(&r, &a), elem(&r, &b), elem(&r, &c));
        prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
        prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
        prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
    }

    #[test]
    fn frobenius_is_a_ring_map(a in digits(), b in digits()) {
        let r = w38();
        let (a, b) = (elem(&r, &a), elem(&r, &b));
        prop_assert_eq!(r.frobenius(&r.add(&a, &b)), r.add(&r.frobenius(&a), &r.frobenius(&b)));
        prop_assert_eq!(r.frobenius(&r.mul(&a, &b)), r.mul(&r.frobenius(&a), &r.frobenius(&b)));
        prop_assert_eq!(r.frobenius(&r.verschiebung(&a)), r.scale(&a, 2));
    }

    #[test]
    fn teichmuller_is_multiplicative(a in digits(), b in digits()) {
        let r = w38();
        let (a, b) = (elem(&r, &a), elem(&r, &b));
        let lhs = r.teichmuller(&r.mul(&a, &b));
        prop_assert_eq!(lhs, r.mul(&r.teichmuller(&a), &r.teichmuller(&b)));
    }

    #[test]
    fn laurent_products(
        f in prop::collection::vec((-4i64..8, -20i64..20), 0..6),
        g in prop::collection::vec((-4i64..8, -20i64..20), 0..6),
        h in prop::collection::vec((-4i64..8, -20i64..20), 0..6),
    ) {
        let s = SeriesRing::new(WittRing::prime(3, 3).unwrap(), -12, 30).unwrap();
        let (f, g, h) = (s.from_ints(&f).unwrap(), s.from_ints(&g).unwrap(), s.from_ints(&h).unwrap());
        let fg_h = s.mul(&s.mul(&f, &g).unwrap(), &h).unwrap();
        let f_gh = s.mul(&f, &s.mul(&g, &h).unwrap()).unwrap();
        prop_assert!(s.eq(&fg_h, &f_gh));
        let dot = s.dot(&[(&f, &g), (&f, &h)]).unwrap();
        prop_assert!(s.eq(&dot, &s.mul(&f, &s.add(&g, &h)).unwrap()));
    }

    #[test]
    fn theta_sum_and_product(
        f in prop::collection::vec((0i64..8, -9i64..9), 0..5),
        g in prop::collection::vec((0i64..8, -9i64..9), 0..5),
        shift in prop::bool::ANY,
    ) {
        let s = SeriesRing::new(WittRing::prime(2, 5).unwrap(), -8, 32).unwrap();
        let t = ThetaStructure::shifted(&s, if shift { 2 } else { 0 }).unwrap();
        let check = t.check_axioms(&s.from_ints(&f).unwrap(), &s.from_ints(&g).unwrap()).unwrap();
        prop_assert!(check.ok(), "{:?}", check);
    }
}
