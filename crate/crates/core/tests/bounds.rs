use proptest::prelude::*;

use secretary_gap::bounds::{
    alpha_exact, consistency, frontier, guarantee_exact_gap, robustness, tau_for_k,
    two_three_tie_prob, two_three_tie_prob_exact, KAggregation,
};

#[test]
fn frontier_contains_the_reference_point_and_is_monotone() {
    let targets: Vec<f64> = (0..=40).map(|i| i as f64 * 0.01).collect();
    let mut with_point = targets.clone();
    with_point.push(robustness(0.2, 0.6).unwrap());
    let f = frontier(&with_point, 0.01).unwrap();
    let last = f.points.last().unwrap().optimum.unwrap();
    assert!(
        last.consistency
            >= consistency(0.2, 0.6, KAggregation::worst_case())
                .unwrap()
                .alpha
    );
    assert!(last.consistency >= 0.383);

    let mut prev = f64::INFINITY;
    for p in &f.points[..targets.len()] {
        match p.optimum {
            Some(o) => {
                assert!(o.consistency <= prev + 1e-15);
                assert!(o.robustness >= p.robustness_target);
                prev = o.consistency;
            }
            None => prev = f64::NEG_INFINITY,
        }
    }
    // Robustness never exceeds 1/e, so 0.4 is out of reach.
    assert!(f.points[40].optimum.is_none());
}

#[test]
fn frontier_is_reproducible() {
    let f = frontier(&[0.0], 0.05).unwrap();
    let best = f.points[0].optimum.unwrap();
    let g = frontier(&[0.0], 0.05).unwrap();
    assert_eq!(best, g.points[0].optimum.unwrap());
}

proptest! {
    #[test]
    fn exact_gap_theorem_holds(k in 2usize..200_000) {
        let tau = tau_for_k(k).unwrap();
        let alpha = alpha_exact(tau, k).unwrap().alpha;
        prop_assert!(alpha >= guarantee_exact_gap(k).unwrap() - 1e-12);
    }

    #[test]
    fn exact_gap_components_are_probabilities(tau in 0.001f64..0.999, k in 2usize..10_000) {
        let r = alpha_exact(tau, k).unwrap();
        for t in &r.components {
            prop_assert!(t.value >= 0.0, "{} = {}", t.name, t.value);
        }
        prop_assert!((0.0..=1.0).contains(&r.alpha));
        prop_assert_eq!(r.component(r.binding_term), Some(r.alpha));
    }

    #[test]
    fn robustness_grows_with_both_parameters(
        tau in 0.0f64..0.5, gamma in 0.0f64..0.5, dt in 0.0f64..0.01, dg in 0.0f64..0.01,
    ) {
        let base = robustness(tau, gamma).unwrap();
        prop_assert!(robustness(tau + dt, gamma).unwrap() >= base);
        prop_assert!(robustness(tau, gamma + dg).unwrap() >= base);
        prop_assert!(base <= (-1.0f64).exp() + 1e-12);
    }

    #[test]
    fn consistency_is_a_valid_ratio(tau in 0.01f64..0.99, frac in 0.0f64..1.0, k in 2usize..500) {
        let gamma = frac * (1.0 - tau);
        let worst = consistency(tau, gamma, KAggregation::worst_case()).unwrap();
        let known = consistency(tau, gamma, KAggregation::Index(k)).unwrap();
        prop_assert!((0.0..=1.0).contains(&worst.alpha));
        prop_assert!(worst.alpha <= known.alpha + 1e-15);
    }

    #[test]
    fn tie_probability_limits(tau in 0.01f64..1.0) {
        let limit = two_three_tie_prob(tau).unwrap();
        let exact = two_three_tie_prob_exact(tau, 5000).unwrap();
        prop_assert!((limit - exact).abs() < 1e-3);
        prop_assert!((0.0..=1.0).contains(&limit));
    }
}
