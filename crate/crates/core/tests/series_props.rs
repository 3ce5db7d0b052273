//! Algebraic laws of truncated formal power series over the rationals.

use jrsa_core::numkit::{parse_rational, ratio, FormalSeries, Rational};
use num_traits::Zero;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| ratio(p, q))
}

fn series(order: usize) -> impl Strategy<Value = FormalSeries> {
    prop::collection::vec(rational(), order).prop_map(|c| FormalSeries::new(c).unwrap())
}

/// `z + c_2 z^2 + ...`-type series: zero constant term, nonzero linear term.
fn invertible_inner(order: usize) -> impl Strategy<Value = FormalSeries> {
    (rational().prop_filter("nonzero", |q| !q.is_zero()), prop::collection::vec(rational(), order - 2)).prop_map(
        move |(lin, rest)| {
            let mut c = vec![Rational::zero(), lin];
            c.extend(rest);
            FormalSeries::new(c).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_commutes(a in series(7), b in series(7)) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn multiplication_associates(a in series(6), b in series(6), c in series(6)) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn reversion_inverts_composition(f in invertible_inner(7)) {
        let g = f.reverse().unwrap();
        let id = FormalSeries::identity(7).unwrap();
        prop_assert_eq!(f.compose(&g).unwrap(), id.clone());
        prop_assert_eq!(g.compose(&f).unwrap(), id);
    }

    #[test]
    fn reciprocal(a in series(6)) {
        prop_assume!(!a.coeff(0).is_zero());
        prop_assert_eq!(a.mul(&a.recip().unwrap()).unwrap(), FormalSeries::one(6).unwrap());
    }

    #[test]
    fn rational_literals_round_trip(q in rational()) {
        let text = jrsa_core::numkit::format_rational(&q);
        prop_assert_eq!(parse_rational(&text).unwrap(), q);
    }
}

#[test]
fn order_mismatch_is_an_error() {
    let a = FormalSeries::one(3).unwrap();
    let b = FormalSeries::one(4).unwrap();
    assert!(a.mul(&b).is_err());
    assert!(FormalSeries::one(3).unwrap().reverse().is_err());
}
