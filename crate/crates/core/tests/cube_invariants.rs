use proptest::prelude::*;
use stabkit::cube::{
    majority, majority_stability_dp, random_dyadic, stability_exhaustive, BooleanFunction, RangeTag,
};
use stabkit::delta::restriction_coefficient;
use stabkit::{ExactFunction, Rational, Scalar};

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn unit_function(n: usize) -> impl Strategy<Value = ExactFunction> {
    proptest::collection::vec(0i64..=16, 1 << n)
        .prop_map(move |v| BooleanFunction::new(n, v.into_iter().map(|k| q(k, 16)).collect(), RangeTag::UnitInterval).unwrap())
}

fn rho() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![q(1, 4), q(-1, 4), q(3, 4), q(-3, 4)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_is_exact(f in (1usize..=6).prop_flat_map(unit_function)) {
        let fe = f.fourier().unwrap();
        prop_assert_eq!(fe.parseval_sum(), f.second_moment());
        let back = fe.to_function().unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn spectral_stability_matches_double_sum(f in (1usize..=6).prop_flat_map(unit_function), r in rho()) {
        let fe = f.fourier().unwrap();
        let spectral = fe.stability_bilinear(fe, &r).unwrap();
        prop_assert_eq!(spectral, stability_exhaustive(&f, &f, &r).unwrap());
    }

    #[test]
    fn noise_is_a_semigroup(f in (1usize..=5).prop_flat_map(unit_function), a in -4i64..=4, b in -4i64..=4) {
        let (s, t) = (q(a, 4), q(b, 4));
        let fe = f.fourier().unwrap();
        let twice = fe.noise(&s).unwrap().noise(&t).unwrap();
        let once = fe.noise(&(s * t)).unwrap();
        prop_assert_eq!(twice.coeffs(), once.coeffs());
    }

    #[test]
    fn complement_has_same_two_sided_stability(f in (1usize..=6).prop_flat_map(unit_function), r in rho()) {
        let g = f.complement().unwrap();
        prop_assert_eq!(
            f.fourier().unwrap().stab_two_sided(&r).unwrap(),
            g.fourier().unwrap().stab_two_sided(&r).unwrap()
        );
    }

    #[test]
    fn restriction_coefficients_agree(seed in 0u64..1000, n in 2usize..=5) {
        let f = random_dyadic::<Rational>(n, 4, seed).unwrap();
        let s: Vec<usize> = (1..=n / 2).collect();
        let u: Vec<usize> = (n / 2 + 1..=n).collect();
        let x: Vec<i8> = s.iter().map(|i| if (seed >> i) & 1 == 0 { 1 } else { -1 }).collect();
        prop_assert!(restriction_coefficient(&f, &s, &x, &u).unwrap().agree());
    }
}

#[test]
fn majority_recursion_matches_exact_stability() {
    for n in (1..=15).step_by(2) {
        let f = majority::<f64>(n).unwrap();
        for rho in [-0.75, -0.25, 0.25, 0.5, 0.75] {
            let exact = f.fourier().unwrap().stab_two_sided(&rho).unwrap();
            let dp = majority_stability_dp(n, rho).unwrap();
            assert!((exact - dp).abs() <= 1e-12, "n = {n}, rho = {rho}: {exact} vs {dp}");
        }
    }
}

#[test]
fn even_majority_is_rejected() {
    assert!(majority::<Rational>(4).is_err());
    assert!(majority_stability_dp(10, 0.5).is_err());
}

#[test]
fn float_and_exact_tables_agree() {
    let f = random_dyadic::<Rational>(5, 6, 11).unwrap();
    let g = f.map_scalar(|v| v.to_double());
    let (a, b) = (f.fourier().unwrap(), g.fourier().unwrap());
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x.to_double() - y).abs() < 1e-15);
    }
}
