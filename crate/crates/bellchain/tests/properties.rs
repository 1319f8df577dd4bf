//! Randomized invariant checks: probability identities of the measurement
//! model, scenario scaling laws, closure properties of signal-local boxes,
//! and consistency of the sampling/estimation pipeline.

use bellchain::chained::equally_spaced_quantum_value;
use bellchain::{
    advantage, averages_to_quantum, bkp_bound_check, chained_value_closed_form, chained_value_of,
    chained_value_trace, check_no_signalling, construct_product_state_model,
    deterministic_factorization_check, equally_spaced_settings, estimate_chained,
    identity_decomposition, joint_probability, local_deterministic_minimum, marginal,
    povm_element, sample_rounds, settings_for_epsilon, BehaviorBox, ComplexMatrix,
    EntangledPairState, MeasurementAngle, Schedule, ScenarioSettings,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::f64::consts::PI;

fn settings_from(alice: &[f64], bob: &[f64]) -> ScenarioSettings {
    ScenarioSettings::new(
        alice.iter().copied().map(MeasurementAngle::new).collect(),
        bob.iter().copied().map(MeasurementAngle::new).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn povm_outcomes_complete_to_identity(theta in -10.0..10.0f64) {
        let e0 = povm_element(MeasurementAngle::new(theta), 0);
        let e1 = povm_element(MeasurementAngle::new(theta), 1);
        let mut sum = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                sum.set(i, j, e0.get(i, j) + e1.get(i, j));
            }
        }
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn joint_outcomes_form_a_distribution(
        alpha in 0.0..=1.0f64,
        theta_a in -10.0..10.0f64,
        theta_b in -10.0..10.0f64,
    ) {
        let state = EntangledPairState::new(alpha).unwrap();
        let mut total = 0.0;
        for x in 0..2u8 {
            for y in 0..2u8 {
                let p = joint_probability(
                    &state,
                    MeasurementAngle::new(theta_a),
                    MeasurementAngle::new(theta_b),
                    x,
                    y,
                );
                prop_assert!((-1e-14..=1.0 + 1e-14).contains(&p));
                total += p;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifting_a_setting_by_pi_relabels_its_outcomes(
        alpha in 0.0..=1.0f64,
        theta_a in -10.0..10.0f64,
        theta_b in -10.0..10.0f64,
    ) {
        let state = EntangledPairState::new(alpha).unwrap();
        for x in 0..2u8 {
            for y in 0..2u8 {
                let shifted = joint_probability(
                    &state,
                    MeasurementAngle::new(theta_a + PI),
                    MeasurementAngle::new(theta_b),
                    x,
                    y,
                );
                let relabeled = joint_probability(
                    &state,
                    MeasurementAngle::new(theta_a),
                    MeasurementAngle::new(theta_b),
                    1 - x,
                    y,
                );
                prop_assert!((shifted - relabeled).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn born_rule_boxes_never_signal(
        alpha in 0.0..=1.0f64,
        angles in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..6),
    ) {
        let state = EntangledPairState::new(alpha).unwrap();
        let alice: Vec<f64> = angles.iter().map(|p| p.0).collect();
        let bob: Vec<f64> = angles.iter().map(|p| p.1).collect();
        let settings = settings_from(&alice, &bob);
        let bx = BehaviorBox::from_quantum(&state, &settings);
        prop_assert!(check_no_signalling(&bx, 1e-10).passes);
    }

    #[test]
    fn closed_form_tracks_the_trace_evaluation(
        alpha in 0.0..=1.0f64,
        angles in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..8),
    ) {
        let state = EntangledPairState::new(alpha).unwrap();
        let alice: Vec<f64> = angles.iter().map(|p| p.0).collect();
        let bob: Vec<f64> = angles.iter().map(|p| p.1).collect();
        let settings = settings_from(&alice, &bob);
        let trace = chained_value_trace(&state, &settings).value;
        let closed = chained_value_closed_form(&state, &settings);
        prop_assert!((trace - closed).abs() <= 1e-9, "trace {trace} closed {closed}");
    }

    #[test]
    fn epsilon_scenarios_stay_within_half_the_budget(epsilon in 1e-3..1.0f64) {
        let (n, settings) = settings_for_epsilon(epsilon).unwrap();
        prop_assert!(n >= 2);
        let value = chained_value_trace(&EntangledPairState::maximally_entangled(), &settings).value;
        prop_assert!(value <= epsilon / 2.0 + 1e-12, "n {n} value {value} for epsilon {epsilon}");
    }

    #[test]
    fn deterministic_strategies_score_at_least_the_local_floor(
        f in prop::collection::vec(0u8..2, 2..7),
        seed in any::<u64>(),
    ) {
        let n = f.len();
        let mut g = vec![0u8; n];
        let mut s = seed;
        for slot in g.iter_mut() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *slot = ((s >> 33) & 1) as u8;
        }
        let bx = BehaviorBox::deterministic_local(&f, &g).unwrap();
        let report = chained_value_of(&bx).unwrap();
        prop_assert!(report.value >= 1.0 - 1e-12, "value {}", report.value);
        let check = deterministic_factorization_check(&bx).unwrap();
        prop_assert!(check.no_signalling && check.factorizes);
    }

    #[test]
    fn sampled_boxes_are_signal_local_and_stay_so_under_mixing(
        seed in any::<u64>(),
        n in 2usize..5,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let first = BehaviorBox::sample_no_signalling(n, n, &mut rng);
        let second = BehaviorBox::sample_no_signalling(n, n, &mut rng);
        prop_assert!(check_no_signalling(&first, 1e-12).passes);
        prop_assert!(check_no_signalling(&second, 1e-12).passes);
        let mixed: Vec<f64> = first
            .entries()
            .iter()
            .zip(second.entries())
            .map(|(p, q)| 0.5 * p + 0.5 * q)
            .collect();
        let mix = BehaviorBox::new(n, n, mixed).unwrap();
        prop_assert!(check_no_signalling(&mix, 1e-12).passes);
    }

    #[test]
    fn marginal_asymmetry_never_exceeds_the_chained_value(
        seed in any::<u64>(),
        n in 2usize..5,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bx = BehaviorBox::sample_no_signalling(n, n, &mut rng);
        let value = chained_value_of(&bx).unwrap().value;
        for a in 0..n {
            prop_assert!(bx.alice_asymmetry(a).abs() <= value + 1e-9);
        }
    }

    #[test]
    fn identity_decomposition_reproduces_quantum_predictions_exactly(
        alpha in 0.0..=1.0f64,
        n in 2usize..5,
    ) {
        let state = EntangledPairState::new(alpha).unwrap();
        let settings = equally_spaced_settings(n).unwrap();
        let model = identity_decomposition(&state, &settings);
        prop_assert!(averages_to_quantum(&model, 1e-12).passes);
        // A single-atom decomposition predicts no better than the Born
        // marginals themselves: its advantage is exactly their asymmetry.
        let b0 = settings.bob_angles()[0];
        let born_asym = settings
            .alice_angles()
            .iter()
            .map(|&a| (marginal(&state, a, b0, 0) - marginal(&state, a, b0, 1)).abs())
            .fold(0.0f64, f64::max);
        let report = advantage(&model);
        prop_assert!((report.epsilon_achieved - born_asym).abs() <= 1e-12);
    }
}

#[test]
fn equally_spaced_value_strictly_decreases_and_obeys_its_envelope() {
    let mut previous = equally_spaced_quantum_value(2);
    for n in 3..=200 {
        let value = equally_spaced_quantum_value(n);
        assert!(value < previous, "not decreasing at n = {n}");
        previous = value;
    }
    for n in 2..=10_000 {
        let value = equally_spaced_quantum_value(n);
        assert!(
            value <= PI * PI / (8.0 * n as f64),
            "envelope violated at n = {n}"
        );
    }
}

#[test]
fn local_deterministic_minimum_is_one_for_small_chains() {
    for n in 2..=6 {
        assert_eq!(local_deterministic_minimum(n).unwrap(), 1.0);
    }
}

#[test]
fn product_state_models_average_and_predict_perfectly() {
    for alpha in [0.0, 1.0] {
        for n in 2..=5 {
            let state = EntangledPairState::new(alpha).unwrap();
            let settings = equally_spaced_settings(n).unwrap();
            let model = construct_product_state_model(&state, &settings).unwrap();
            assert!(averages_to_quantum(&model, 1e-9).passes);
            for bx in model.boxes() {
                assert!(check_no_signalling(bx, 1e-9).passes);
            }
            let report = advantage(&model);
            assert!(
                (report.epsilon_achieved - 1.0).abs() < 1e-9,
                "alpha {alpha} n {n} advantage {}",
                report.epsilon_achieved
            );
            let bkp = bkp_bound_check(&model, 1e-9).unwrap();
            assert!(bkp.passes);
        }
    }
}

#[test]
fn certificate_interval_tightens_with_more_rounds() {
    let state = EntangledPairState::maximally_entangled();
    let settings = equally_spaced_settings(3).unwrap();
    let mut previous = f64::INFINITY;
    for rounds in [1_000u64, 10_000, 100_000, 1_000_000] {
        let records = sample_rounds(&state, &settings, rounds, 7, Schedule::ChainOnly).unwrap();
        let cert = estimate_chained(&records, &settings, 0.99).unwrap();
        assert!(
            cert.certified_epsilon < previous,
            "no tightening at {rounds} rounds"
        );
        previous = cert.certified_epsilon;
    }
}

#[test]
fn uniform_schedule_estimates_agree_with_the_trace_value() {
    let state = EntangledPairState::maximally_entangled();
    let settings = equally_spaced_settings(3).unwrap();
    let records = sample_rounds(&state, &settings, 200_000, 11, Schedule::Uniform).unwrap();
    let cert = estimate_chained(&records, &settings, 0.99).unwrap();
    let truth = chained_value_trace(&state, &settings).value;
    assert!(
        (cert.i_n_hat - truth).abs() <= cert.half_width,
        "estimate {} truth {truth} half width {}",
        cert.i_n_hat,
        cert.half_width
    );
}
