use num_rational::BigRational;
use padic_moments::curve::reconstruct;
use padic_moments::cyclotomic::{degree, Cyclotomic};
use padic_moments::digit::{amice, digit_forward, digit_inverse, horizontalize, verticalize};
use padic_moments::measure::{GroupShape, Measure};
use padic_moments::moments::{identity_check, moment_sum, moment_sum_flat};
use padic_moments::scalar::Valuation;
use proptest::prelude::*;

type C = Cyclotomic<BigRational>;
type M = Measure<BigRational>;

fn cyclo(p: u32, level: u32) -> impl Strategy<Value = C> {
    prop::collection::vec(-20i64..=20, degree(p, level))
        .prop_map(move |v| C::from_coeffs(p, level, v.into_iter().map(|x| BigRational::from_integer(x.into())).collect()).unwrap())
}

fn shape() -> impl Strategy<Value = GroupShape> {
    (prop::sample::select(vec![2u32, 3, 5]), prop::collection::vec(1u32..=2, 1..=3))
        .prop_filter("small", |(p, e)| (*p as usize).pow(e.iter().sum::<u32>()) <= 243)
        .prop_map(|(p, e)| GroupShape::new(p, e).unwrap())
}

fn measure_on(shape: GroupShape) -> impl Strategy<Value = M> {
    let n = shape.size();
    prop::collection::vec(-9i64..=9, n).prop_map(move |v| {
        M::from_coeffs(&shape, v.into_iter().map(|x| C::from_i64(shape.prime(), 0, x)).collect()).unwrap()
    })
}

fn uniform_measure(p: u32, k: usize) -> impl Strategy<Value = M> {
    measure_on(GroupShape::uniform(p, 1, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_laws(a in cyclo(3, 2), b in cyclo(3, 2), c in cyclo(3, 2)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn inverse_and_valuation(a in cyclo(5, 1), b in cyclo(5, 1)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!(&a * &a.inverse().unwrap(), C::one(5, 1));
        prop_assert_eq!((&a * &b).valuation(), a.valuation() + b.valuation());
        prop_assert_eq!(a.valuation(), a.valuation_via_norm());
    }

    #[test]
    fn digit_map_round_trip(s in shape(), seed in any::<u64>()) {
        let x = seed % s.size() as u64;
        let t = digit_inverse(&s, x);
        prop_assert_eq!(digit_forward(&s, &t).unwrap(), x);
    }

    #[test]
    fn fourier_round_trip(nu in shape().prop_flat_map(measure_on)) {
        let back = M::fourier_inverse_dense(nu.shape(), nu.transform()).unwrap();
        prop_assert_eq!(back, nu);
    }

    #[test]
    fn vertical_round_trip(nu in shape().prop_flat_map(measure_on)) {
        let v = verticalize(&nu);
        prop_assert_eq!(&amice(&v).to_vertical(), &v);
        prop_assert_eq!(horizontalize(&v, nu.shape()).unwrap(), nu);
    }

    #[test]
    fn moment_identity(nu in (1usize..=3).prop_flat_map(|k| uniform_measure(3, k)), k0 in 1u64..=2) {
        let check = identity_check(&nu, k0).unwrap();
        prop_assert!(check.holds);
        prop_assert_eq!(moment_sum(&nu, k0).unwrap(), moment_sum_flat(&nu, k0).unwrap());
    }

    #[test]
    fn moment_valuation_bounded_below(nu in uniform_measure(5, 2)) {
        // integral measures have moments of valuation at least −1/(p−1)
        let v = moment_sum(&nu, 1).unwrap().valuation();
        prop_assert!(v >= Valuation::ratio(-1, 4));
    }

    #[test]
    fn reconstruction_recovers_small_fractions(n in -500i64..500, d in 1i64..200, noise in -1e-13f64..1e-13) {
        let x = n as f64 / d as f64 + noise;
        let got = reconstruct(&x, 200, &1e-9).unwrap();
        prop_assert_eq!(got, BigRational::new(n.into(), d.into()));
    }
}
