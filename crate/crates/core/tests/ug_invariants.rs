use std::collections::BTreeMap;

use proptest::prelude::*;
use stabkit::ug::{
    cut_value, integral_tables, kkmo_reduce, refutation_objective, toy_instance, ug_value, CutAssignment, EdgeSampler,
    GeneratorKind,
};
use stabkit::{Rational, Scalar};

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop::sample::select(vec![GeneratorKind::Perfect, GeneratorKind::CycleShift, GeneratorKind::Random])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduction_is_a_probability_distribution(kind in kind(), vertices in 2usize..=5, k in 2usize..=3, seed in 0u64..500, r in -4i64..=4) {
        let g = toy_instance(kind, vertices, k, 2, seed).unwrap();
        let mc = kkmo_reduce(&g.instance, &q(r, 4)).unwrap();
        prop_assert_eq!(mc.total_weight(), q(1, 1));
        prop_assert!(mc.edges.values().all(|w| *w >= q(0, 1)));
    }

    #[test]
    fn cut_value_matches_stability_route(kind in kind(), vertices in 2usize..=4, k in 2usize..=3, seed in 0u64..500, r in -4i64..=4) {
        let g = toy_instance(kind, vertices, k, 2, seed).unwrap();
        let cut = CutAssignment::random(k, vertices, seed + 1).unwrap();
        let v = cut_value(&g.instance, &q(r, 4), &cut).unwrap();
        prop_assert!(v.agree, "{} vs {}", v.direct, v.via_stability);
    }

    #[test]
    fn dictators_on_a_satisfying_labeling_cut_half_of_one_minus_rho(vertices in 2usize..=4, k in 2usize..=3, seed in 0u64..500, r in -4i64..=0) {
        let g = toy_instance(GeneratorKind::Perfect, vertices, k, 2, seed).unwrap();
        let labeling = g.hidden_labeling.unwrap();
        prop_assert_eq!(ug_value(&g.instance, &labeling).unwrap(), q(1, 1));
        let rho = q(r, 4);
        let cut = CutAssignment::dictators(k, &labeling).unwrap();
        let v = cut_value(&g.instance, &rho, &cut).unwrap();
        prop_assert_eq!(v.direct, (q(1, 1) - rho) / Rational::from_int(2));
    }

    #[test]
    fn refutation_objective_dominates_squared_value(kind in kind(), vertices in 2usize..=5, k in 2usize..=4, seed in 0u64..500, labels in proptest::collection::vec(0usize..4, 5)) {
        let g = toy_instance(kind, vertices, k, 2, seed).unwrap();
        let labeling: Vec<usize> = labels[..vertices].iter().map(|l| l % k).collect();
        let val = ug_value(&g.instance, &labeling).unwrap();
        let r = refutation_objective(&g.instance, &integral_tables(&g.instance, &labeling)).unwrap();
        prop_assert!(r.feasible);
        prop_assert!(r.objective >= &val * &val, "{} < {}^2", r.objective, val);
    }
}

#[test]
fn sampler_follows_the_exact_distribution() {
    let g = toy_instance(GeneratorKind::Random, 3, 2, 2, 5).unwrap();
    let rho = -0.5;
    let exact = kkmo_reduce(&g.instance, &q(-1, 2)).unwrap();
    let draws = 200_000;
    let mut counts: BTreeMap<_, usize> = BTreeMap::new();
    for e in EdgeSampler::new(&g.instance, rho, 9).unwrap().take(draws) {
        *counts.entry(e).or_default() += 1;
    }
    let mut tv = 0.0;
    for (e, w) in &exact.edges {
        let p = *counts.get(e).unwrap_or(&0) as f64 / draws as f64;
        tv += (p - w.to_double()).abs();
    }
    assert!(counts.keys().all(|e| exact.edges.contains_key(e)), "sampled an edge of weight zero");
    assert!(tv / 2.0 < 0.02, "total variation {}", tv / 2.0);
}
