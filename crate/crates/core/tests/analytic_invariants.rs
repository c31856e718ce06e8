use proptest::prelude::*;
use stabkit::bernstein::{bernstein_1d, bernstein_2d, shifted_expansion, Poly2};
use stabkit::cube::{BooleanFunction, RangeTag};
use stabkit::delta::{delta_fourier, delta_recursive, flip_bound};
use stabkit::gaussian::JEvaluator;
use stabkit::{ExactFunction, Rational, Scalar};

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn unit_function(n: usize) -> impl Strategy<Value = ExactFunction> {
    proptest::collection::vec(0i64..=16, 1 << n)
        .prop_map(move |v| BooleanFunction::new(n, v.into_iter().map(|k| q(k, 16)).collect(), RangeTag::UnitInterval).unwrap())
}

fn relabel(f: &ExactFunction, map: impl Fn(usize) -> usize) -> ExactFunction {
    let values = (0..f.values().len()).map(|z| f.values()[map(z)].clone()).collect();
    BooleanFunction::new(f.n(), values, RangeTag::UnitInterval).unwrap()
}

fn unit() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn j_is_monotone_and_within_frechet_bounds(rho in -0.95f64..0.95, x in unit(), y in unit(), dx in 0.0f64..0.2) {
        let j = JEvaluator::new(rho).unwrap();
        let v = j.value(x, y).unwrap();
        prop_assert!(v >= (x + y - 1.0).max(0.0) - 1e-13);
        prop_assert!(v <= x.min(y) + 1e-13);
        let x2 = (x + dx).min(0.99);
        prop_assert!(j.value(x2, y).unwrap() >= v - 1e-13);
        let (gx, gy) = j.grad(x, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&gx) && (0.0..=1.0).contains(&gy));
    }

    #[test]
    fn j_is_ordered_by_the_sign_of_rho(rho in 0.01f64..0.95, x in unit(), y in unit()) {
        let pos = JEvaluator::new(rho).unwrap().value(x, y).unwrap();
        let neg = JEvaluator::new(-rho).unwrap().value(x, y).unwrap();
        prop_assert!(pos >= x * y - 1e-13 && neg <= x * y + 1e-13);
    }

    #[test]
    fn j_is_symmetric(rho in -0.95f64..0.95, x in unit(), y in unit()) {
        let j = JEvaluator::new(rho).unwrap();
        prop_assert!((j.value(x, y).unwrap() - j.value(y, x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn delta_routes_agree_and_respect_the_flip_bound(f in (1usize..=6).prop_flat_map(unit_function)) {
        let rec = delta_recursive(&f);
        prop_assert_eq!(&rec, &delta_fourier(&f).unwrap());
        prop_assert!(rec <= flip_bound(&f));
        prop_assert!(rec >= q(0, 1));
    }

    #[test]
    fn delta_ignores_sign_flips(f in (2usize..=5).prop_flat_map(unit_function), i in 0usize..5) {
        // Coordinate order matters (restrictions peel coordinates in turn); signs do not.
        let flipped = relabel(&f, |z| z ^ (1 << (i % f.n())));
        prop_assert_eq!(delta_recursive(&flipped), delta_recursive(&f));
    }

    #[test]
    fn bernstein_reproduces_affine_functions(a in -5i64..=5, b in -5i64..=5, c in -5i64..=5, n in 1usize..=6, x in 0i64..=8, y in 0i64..=8) {
        let (qa, qb, qc) = (q(a, 3), q(b, 3), q(c, 3));
        let (px, py) = (q(x, 8), q(y, 8));
        let p1 = bernstein_1d(|t| &qa * t + &qc, n).unwrap();
        prop_assert_eq!(p1.eval(&px), &qa * &px + &qc);
        let p2 = bernstein_2d(|s, t| &qa * s + &qb * t + &qc, n).unwrap();
        prop_assert_eq!(p2.eval(&px, &py), &qa * &px + &qb * &py + &qc);
        let one = bernstein_2d(|_, _| q(1, 1), n).unwrap();
        prop_assert_eq!(one.eval(&px, &py), q(1, 1));
    }

    #[test]
    fn shifted_expansion_is_a_change_of_origin(
        terms in proptest::collection::vec((0usize..4, 0usize..4, -6i64..=6), 1..8),
        a in -4i64..=4, b in -4i64..=4, x in -4i64..=4, y in -4i64..=4,
    ) {
        let terms: Vec<_> = terms.into_iter().map(|(m, n, c)| (m, n, q(c, 2))).collect();
        let p = Poly2::from_terms(&terms);
        let (qa, qb, qx, qy) = (q(a, 3), q(b, 3), q(x, 5), q(y, 5));
        let nu = shifted_expansion(&p, &qa, &qb);
        prop_assert_eq!(nu.eval(&qx, &qy), p.eval(&(&qa + &qx), &(&qb + &qy)));
        // The constant and linear coefficients are the value and gradient at (a, b).
        prop_assert_eq!(nu.coeff(0, 0), p.eval(&qa, &qb));
        prop_assert_eq!(nu.coeff(1, 0), p.partial(1, 0).eval(&qa, &qb));
        prop_assert_eq!(nu.coeff(0, 1), p.partial(0, 1).eval(&qa, &qb));
    }
}
