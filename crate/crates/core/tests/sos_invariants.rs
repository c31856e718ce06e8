use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabkit::sos::certificate::{product_certificate, scale, sum, transitive};
use stabkit::sos::{
    certificate_library, check_pseudo_expectation, search_certificate, vars, verify_certificate, Certificate,
    ConstraintSet, IneqTerm, LibraryFact, Polynomial, PseudoExpectation, SearchOutcome,
};
use stabkit::{Rational, Scalar};

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

#[test]
fn library_targets_hold_on_sampled_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for fact in LibraryFact::standard_instances() {
        for e in certificate_library(&fact).unwrap() {
            // Equality-constrained sets are thin; sampling would never land on them.
            if !e.constraints.equalities.is_empty() {
                continue;
            }
            let h = e.target.map_coeffs(|c| c.to_double());
            let n = e.constraints.vars.len();
            let mut hits = 0;
            for _ in 0..4000 {
                let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                if e.constraints.contains(&p, 0.0) {
                    hits += 1;
                    assert!(h.eval(&p) >= -1e-9, "{} fails at {p:?}", e.name);
                }
            }
            assert!(hits > 0, "{}: no feasible sample", e.name);
        }
    }
}

#[test]
fn library_certificates_reverify() {
    for fact in LibraryFact::standard_instances() {
        for e in certificate_library(&fact).unwrap() {
            assert!(verify_certificate(&e.target, &e.constraints, &e.certificate).unwrap().valid, "{}", e.name);
        }
    }
}

fn interval() -> ConstraintSet {
    ConstraintSet::parse(&vars(&["y"]), &[], &["1-y", "1+y"]).unwrap()
}

/// `q_i ≥ 0` itself, as a one-term certificate.
fn atom(a: &ConstraintSet, i: usize) -> Certificate {
    let mut exps = vec![0; a.inequalities.len()];
    exps[i] = 1;
    Certificate::new(1).with_ineq(IneqTerm::unit(exps, vec![Polynomial::constant(&a.vars, q(1, 1))]))
}

fn poly(src: &str) -> Polynomial {
    Polynomial::parse(&vars(&["y"]), src).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn combinators_preserve_validity(num in 0i64..=20, den in 1i64..=7) {
        let a = interval();
        let (lo, hi) = (atom(&a, 0), atom(&a, 1));
        prop_assert!(verify_certificate(&poly("2"), &a, &sum(&lo, &hi)).unwrap().valid);
        prop_assert!(verify_certificate(&poly("2"), &a, &transitive(&lo, &hi)).unwrap().valid);
        let lambda = q(num, den);
        let scaled = scale(&lo, &lambda).unwrap();
        let want = poly("1-y").scale(&lambda);
        prop_assert!(verify_certificate(&want, &a, &scaled).unwrap().valid);
        let prod = product_certificate(&a, &lo, &hi).unwrap();
        prop_assert!(verify_certificate(&poly("1-y^2"), &a, &prod).unwrap().valid);
    }

    #[test]
    fn perturbed_library_coefficients_are_rejected(pick in 0usize..1000, slot in 0usize..1000, num in 1i64..=9, den in 1i64..=9) {
        let entries: Vec<_> = LibraryFact::standard_instances()
            .iter()
            .flat_map(|f| certificate_library(f).unwrap())
            .filter(|e| e.certificate.coefficient_slots() > 0)
            .collect();
        let e = &entries[pick % entries.len()];
        let p = e.certificate.perturbed(slot % e.certificate.coefficient_slots(), &q(num, den));
        let accepted = verify_certificate(&e.target, &e.constraints, &p).is_ok_and(|v| v.valid);
        prop_assert!(!accepted, "{} accepted a perturbation", e.name);
    }

    #[test]
    fn cube_measures_are_pseudo_expectations(n in 1usize..=3, weights in proptest::collection::vec(1u32..10, 8)) {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let v = vars(&refs);
        let eqs: Vec<String> = names.iter().map(|x| format!("{x}^2 - 1")).collect();
        let eqs: Vec<&str> = eqs.iter().map(String::as_str).collect();
        let a = ConstraintSet::parse(&v, &eqs, &[]).unwrap();
        let atoms: Vec<(Vec<f64>, f64)> = (0..1usize << n)
            .map(|z| ((0..n).map(|j| if (z >> j) & 1 == 0 { 1.0 } else { -1.0 }).collect(), weights[z] as f64))
            .collect();
        let pe = PseudoExpectation::from_distribution(&v, 4, &atoms);
        let report = check_pseudo_expectation(&pe, &a).unwrap();
        prop_assert!(report.ok, "{report:?}");
    }
}

#[test]
fn found_certificates_reverify() {
    let a = interval();
    for (src, d) in [("1 - y^2", 2), ("y^2 - y^4", 4), ("2 + y", 2)] {
        let h = poly(src);
        match search_certificate(&h, &a, d).unwrap() {
            SearchOutcome::Certificate { certificate, .. } => {
                assert!(verify_certificate(&h, &a, &certificate).unwrap().valid, "{src}")
            }
            other => panic!("{src}: no certificate at degree {d}: {other:?}"),
        }
    }
}

#[test]
fn negative_target_has_a_witness() {
    let h = poly("y - 2");
    match search_certificate(&h, &interval(), 2).unwrap() {
        SearchOutcome::Infeasible { value, .. } => assert!(value < 0.0),
        other => panic!("expected a witness: {other:?}"),
    }
}
