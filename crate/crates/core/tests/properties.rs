use std::collections::BTreeSet;

use langcontact::calibration::{sigma_interval, DemographicRecord};
use langcontact::dynamics::{
    classify_phase, find_equilibrium, sigma_crit, step_map, PhaseLabel, Regime,
};
use langcontact::environment::{ModelParams, PopulationState};
use langcontact::learning::{
    apply_operator, asymptotic_mean, mean_trajectory, variance_limit, Environment2x2, Grammar,
    LearningRates, MomentConstants, Response,
};
use proptest::prelude::*;

fn grammar() -> impl Strategy<Value = Grammar> {
    prop_oneof![Just(Grammar::G1), Just(Grammar::G2)]
}

fn response() -> impl Strategy<Value = Response> {
    prop_oneof![Just(Response::Reward), Just(Response::Penalty)]
}

proptest! {
    #[test]
    fn operators_keep_probabilities_in_unit_interval(
        p in 0.0f64..=1.0, gamma in 1e-4f64..0.5, d in 0.0f64..1.0, g in grammar(), r in response()
    ) {
        let rates = LearningRates::from_ratio(gamma, d).unwrap();
        let next = apply_operator(p, g, r, &rates).unwrap();
        prop_assert!((0.0..=1.0).contains(&next));
    }

    #[test]
    fn mean_recursion_contracts(
        pi1 in 0.01f64..0.99, pi2 in 0.01f64..0.99, gamma in 1e-4f64..0.5, d in 0.0f64..1.0
    ) {
        let env = Environment2x2::from_penalties(pi1, pi2).unwrap();
        let rates = LearningRates::from_ratio(gamma, d).unwrap();
        let k = MomentConstants::from_rates(&env, &rates);
        prop_assert!(k.c1.abs() < 1.0);
        prop_assert!((0.0..=1.0).contains(&k.mean_limit()));
    }

    #[test]
    fn asymptote_falls_with_difficulty(
        pi1 in 0.01f64..0.99, pi2 in 0.01f64..0.99, d in 0.0f64..5.0, step in 1e-3f64..1.0
    ) {
        let env = Environment2x2::from_penalties(pi1, pi2).unwrap();
        prop_assert!(asymptotic_mean(&env, d + step).unwrap() < asymptotic_mean(&env, d).unwrap());
    }

    #[test]
    fn limiting_variance_is_nonnegative(
        pi1 in 0.01f64..0.99, pi2 in 0.01f64..0.99, gamma in 1e-4f64..0.5, d in 0.0f64..1.0
    ) {
        let env = Environment2x2::from_penalties(pi1, pi2).unwrap();
        let rates = LearningRates::from_ratio(gamma, d).unwrap();
        prop_assert!(variance_limit(&env, &rates).unwrap() >= -1e-15);
    }

    #[test]
    fn mean_trajectory_moves_monotonically_to_limit(
        pi1 in 0.01f64..0.99, pi2 in 0.01f64..0.99, p0 in 0.0f64..=1.0, n in 0u64..5000
    ) {
        let env = Environment2x2::from_penalties(pi1, pi2).unwrap();
        let rates = LearningRates::l1(0.01).unwrap();
        let lim = MomentConstants::from_rates(&env, &rates).mean_limit();
        let a = mean_trajectory(p0, n, &env, &rates).unwrap();
        let b = mean_trajectory(p0, n + 1, &env, &rates).unwrap();
        prop_assert!((b - lim).abs() <= (a - lim).abs() + 1e-15);
        prop_assert!((a - lim).abs() <= (p0 - lim).abs() + 1e-15);
    }

    #[test]
    fn sigma_interval_is_scale_invariant(
        counts in prop::collection::vec(1u64..100_000, 2..6), scale in 2u64..50, low in 0.0f64..=1.0
    ) {
        let names: Vec<String> = (0..counts.len()).map(|i| format!("g{i}")).collect();
        let pool: BTreeSet<String> = names.iter().skip(1).cloned().collect();
        let rec = |k: u64| {
            DemographicRecord::new(1700, names.iter().cloned().zip(counts.iter().map(|c| c * k)).collect()).unwrap()
        };
        let a = sigma_interval(&rec(1), &pool, low).unwrap();
        let b = sigma_interval(&rec(scale), &pool, low).unwrap();
        prop_assert!((a.high - b.high).abs() < 1e-12 && (a.low - b.low).abs() < 1e-12);
        prop_assert!(a.low <= a.high && a.high <= 1.0);
    }

    #[test]
    fn retained_cells_settle_at_an_interior_point(
        alpha in 1.01f64..20.0, d in 0.1f64..50.0, sigma in 0.0f64..=1.0
    ) {
        let params = ModelParams::new(alpha, d, sigma).unwrap();
        let crit = sigma_crit(alpha, d).unwrap();
        prop_assume!(crit.regime != Regime::Bifurcation || (sigma - crit.value).abs() > 0.02);
        if classify_phase(&params) == PhaseLabel::Retained {
            let x = find_equilibrium(&params, PopulationState { p: 0.5, q: 0.5 }, 1e-13, 1_000_000).unwrap();
            prop_assert!(x.p > 1e-6 && x.q > 0.0);
            prop_assert!(step_map(x, &params).sup_distance(&x) < 1e-10);
        }
    }
}
