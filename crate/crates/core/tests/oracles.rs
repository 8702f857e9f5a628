//! Monte Carlo checks of the closed-form learning results.

use langcontact::abm::{
    rng_for, sample_token, simulate_learner_with, InitialProb, LearnerKind, SourceMix,
};
use langcontact::environment::{penalty_probabilities, GrammarAdvantages, PopulationState};
use langcontact::learning::{
    mean_trajectory, moment_recursion, variance_limit, Environment2x2, Grammar, LearningRates,
    MomentConstants, OperatorSet,
};
use langcontact::stats;

fn setup() -> (GrammarAdvantages, Environment2x2) {
    let adv = GrammarAdvantages::new(0.25, 0.2).unwrap();
    let (pi1, pi2) = penalty_probabilities(PopulationState { p: 0.5, q: 0.5 }, 0.5, &adv);
    (adv, Environment2x2::from_penalties(pi1, pi2).unwrap())
}

#[test]
fn penalty_frequencies_follow_law_of_large_numbers() {
    let (adv, env) = setup();
    let mut rng = rng_for(7, 0, 0);
    let n = 400_000;
    let (mut pen1, mut pen2) = (0u32, 0u32);
    for _ in 0..n {
        let t = sample_token(&SourceMix::Pool { g1_frequency: 0.5 }, &adv, &mut rng);
        pen1 += t.penalizes(Grammar::G1) as u32;
        pen2 += t.penalizes(Grammar::G2) as u32;
    }
    for (hits, pi) in [(pen1, env.pi1()), (pen2, env.pi2())] {
        let f = hits as f64 / n as f64;
        let se = (pi * (1.0 - pi) / n as f64).sqrt();
        assert!((f - pi).abs() < 4.0 * se, "frequency {f} vs {pi}");
    }
}

#[test]
fn transient_mean_matches_closed_form() {
    let (adv, env) = setup();
    let cases = [0.1, 0.01].into_iter().flat_map(|g| {
        [
            (LearnerKind::L1, LearningRates::l1(g).unwrap()),
            (LearnerKind::L2, LearningRates::from_ratio(g, 2.0).unwrap()),
        ]
    });
    for (kind, rates) in cases {
        for n in [50u64, 300] {
            let finals: Vec<f64> = (0..10_000)
                .map(|i| {
                    let mut rng = rng_for(11, n, i);
                    simulate_learner_with(
                        &SourceMix::Pool { g1_frequency: 0.5 },
                        &adv,
                        kind,
                        rates,
                        InitialProb::Fixed(0.8),
                        n,
                        n,
                        &mut rng,
                    )
                    .terminal
                })
                .collect();
            let m = stats::mean(&finals);
            let se = (stats::variance(&finals) / finals.len() as f64).sqrt();
            let expected = mean_trajectory(0.8, n, &env, &rates).unwrap();
            assert!(
                (m - expected).abs() < 3.0 * se,
                "{kind} n={n}: {m} vs {expected} (se {se})"
            );
        }
    }
}

#[test]
fn iterated_moments_converge_to_variance_limit() {
    let (_, env) = setup();
    for rates in [
        LearningRates::l1(0.05).unwrap(),
        LearningRates::from_ratio(0.05, 2.0).unwrap(),
    ] {
        let ops = OperatorSet::from_rates(&rates);
        // Point mass at 0.3 has moments 0.3^k.
        let mut mom = vec![1.0, 0.3, 0.09];
        for _ in 0..20_000 {
            let m1 = moment_recursion(&mom, 1, &ops, &env).unwrap();
            let m2 = moment_recursion(&mom, 2, &ops, &env).unwrap();
            mom = vec![1.0, m1, m2];
        }
        let k = MomentConstants::from_rates(&env, &rates);
        assert!((mom[1] - k.mean_limit()).abs() < 1e-12);
        let v = variance_limit(&env, &rates).unwrap();
        assert!(
            (mom[2] - mom[1] * mom[1] - v).abs() < 1e-12,
            "{} vs {v}",
            mom[2] - mom[1] * mom[1]
        );
    }
}

#[test]
fn first_moment_recursion_is_affine() {
    let (_, env) = setup();
    let rates = LearningRates::from_ratio(0.02, 1.5).unwrap();
    let ops = OperatorSet::from_rates(&rates);
    let k = MomentConstants::from_rates(&env, &rates);
    for p in [0.0, 0.2, 0.7, 1.0] {
        let next = moment_recursion(&[1.0, p], 1, &ops, &env).unwrap();
        assert!((next - (k.c0 + k.c1 * p)).abs() < 1e-15);
    }
}
