mod common;

use common::{equator_pattern_realizable, gapped_problem};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qlike::gallery::{counterexample_carrier, CounterexampleOrder};
use qlike::orders::order_from_measure;
use qlike::random::{self, stream_rng};
use qlike::representation::{
    evaluate, partial_representation, synthesize, verify_certificate, RepresentationProblem, RepresentationResult,
};
use qlike::{DensityOperator, Error, Subspace};

fn counter_problem() -> (CounterexampleOrder, Vec<Subspace>, RepresentationProblem) {
    let order = CounterexampleOrder::with_pole(&DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    let carrier = counterexample_carrier(&order, 16).unwrap();
    let prob = RepresentationProblem::from_order(&order, &carrier, true).unwrap();
    (order, carrier, prob)
}

#[test]
fn equator_instance_is_unrealizable_on_a_grid() {
    let (order, carrier, _) = counter_problem();
    let lines = &carrier[1..17];
    assert!(!equator_pattern_realizable(&order, order.frame(), lines));
    // control: an order induced by a measure passes the same scan
    let t = DensityOperator::new(DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.2])).unwrap();
    let m = order_from_measure(t, 1e-12).unwrap();
    assert!(equator_pattern_realizable(&m, order.frame(), lines));
}

#[test]
fn equator_instance_certified_infeasible() {
    let (_, _, prob) = counter_problem();
    let result = synthesize(&prob, 1e-6).unwrap();
    let cert = result.certificate().expect("infeasible").clone();
    assert!(cert.max_eigenvalue <= 1e-8, "λ_max = {}", cert.max_eigenvalue);
    assert!(verify_certificate(&cert, &prob, 1e-8).unwrap());

    let mut tampered = cert.clone();
    let k = tampered.lambda.iter().position(|l| *l > 1e-6).unwrap();
    tampered.lambda[k] = -tampered.lambda[k];
    assert!(!verify_certificate(&tampered, &prob, 1e-8).unwrap());

    let mut rng = stream_rng(11, 0);
    for _ in 0..2_000 {
        let t = random::density(&mut rng, 3);
        let (margin, _) = evaluate(&prob, &t).unwrap();
        assert!(margin <= 1e-6);
    }
}

#[test]
fn equator_instance_partially_representable() {
    let (order, _, prob) = counter_problem();
    let r = partial_representation(&prob, 1e-6).unwrap();
    let t = r.operator().expect("feasible");
    let (margin, residual) = evaluate(&prob, t).unwrap();
    assert!(margin >= -1e-6 && residual <= 1e-6);
    // the pure state at the pole works as well
    let p = qlike::measures::pure_state(order.frame().pole()).unwrap();
    let (margin, residual) = evaluate(&prob, &p).unwrap();
    assert!(margin >= -1e-12 && residual <= 1e-12);
}

#[test]
fn round_trip_recovers_order() {
    for seed in 0..12 {
        let d = 3 + (seed as usize % 3);
        let (_, _, prob) = gapped_problem(seed, d, 10, 1e-4);
        let r = synthesize(&prob, 1e-7).unwrap();
        let RepresentationResult::Feasible { operator, margin, .. } = &r else { panic!("seed {seed}: {r:?}") };
        assert!(*margin >= 1e-6);
        for (a, b) in prob.stricts() {
            assert!(operator.mu(b).unwrap() - operator.mu(a).unwrap() >= 1e-6);
        }
        let partial = partial_representation(&prob, 1e-7).unwrap();
        assert!(partial.margin().unwrap() >= margin - 1e-7);
    }
}

#[test]
fn indeterminate_is_never_reported_as_infeasible() {
    assert!(matches!(synthesize(&counter_problem().2, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(synthesize(&counter_problem().2, 2e-3), Err(Error::InvalidInput(_))));
}

#[test]
fn certificate_needs_strict_pairs() {
    let a = Subspace::coordinate(3, &[0]).unwrap();
    let prob = RepresentationProblem::new(3, vec![(a.clone(), a)], vec![], false).unwrap();
    let cert = qlike::representation::InfeasibilityCertificate {
        lambda: vec![],
        c: vec![1.0],
        m: vec![vec![0.0; 3]; 3],
        max_eigenvalue: 0.0,
    };
    assert!(verify_certificate(&cert, &prob, 1e-8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feasible_results_survive_independent_checks(seed in 0u64..10_000, d in 2usize..5) {
        let (_, _, prob) = gapped_problem(seed, d, 5, 1e-3);
        let r = synthesize(&prob, 1e-6).unwrap();
        let t = r.operator().unwrap();
        let rebuilt = DensityOperator::new(t.matrix().clone()).unwrap();
        let (margin, residual) = evaluate(&prob, &rebuilt).unwrap();
        prop_assert!(margin >= 1e-6 && residual <= 1e-6);
        prop_assert!((margin - r.margin().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn reversed_pair_makes_problem_infeasible(seed in 0u64..10_000) {
        let (_, _, prob) = gapped_problem(seed, 3, 4, 1e-3);
        let (a, b) = prob.stricts()[0].clone();
        let mut strict = prob.stricts().to_vec();
        strict.push((b, a));
        let bad = RepresentationProblem::new(3, prob.equivalences().to_vec(), strict, true).unwrap();
        let r = synthesize(&bad, 1e-6).unwrap();
        let cert = r.certificate().unwrap();
        prop_assert!(verify_certificate(cert, &bad, 1e-6).unwrap());
    }
}
