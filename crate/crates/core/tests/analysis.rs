mod common;

use common::*;
use curvlab::analysis::oracle::DeadCore;
use curvlab::analysis::{
    boundary_attainment, classify_solution, osgood_probe, positivity_probe, positivity_probe_on, u2_integrability,
    AnalysisError, EndpointStatus, JumpDirection, OdeInstance, OdeRhs, OdeTrajectory, OsgoodOutcome,
    PositivityOutcome, ProbeStatus, Shape, TaxonomyCase,
};
use curvlab::criteria::{ComparisonG, StateEnvelope};
use curvlab::solver::{solve, SolveParams};
use curvlab::{BoundaryCondition, CurvatureField, Grid, GridFunction};
use proptest::prelude::*;

const P_TOL: f64 = 1e-4;
const DIR0: BoundaryCondition = BoundaryCondition::Dirichlet { k0: 0.0, k1: 0.0 };

fn unit(n: usize) -> Grid {
    Grid::new(0.0, 1.0, n).unwrap()
}

fn solved(f: &CurvatureField, bc: &BoundaryCondition, n: usize) -> GridFunction {
    solve(f, bc, unit(n), &SolveParams::default()).unwrap().u
}

fn finite_slope(s: EndpointStatus) -> f64 {
    match s {
        EndpointStatus::FiniteSlope { value } => value,
        other => panic!("expected a finite slope, got {other:?}"),
    }
}

#[test]
fn circle_is_concave_single_interval() {
    let f = CurvatureField::Constant(1.0);
    let u = solved(&f, &DIR0, 400);
    let r = classify_solution(&u, &f, P_TOL).unwrap();
    assert_eq!(r.taxonomy_case, TaxonomyCase::I);
    assert_eq!(r.shapes.len(), 1);
    assert_eq!(r.shapes[0].shape, Shape::Concave);
    assert!(r.jumps.is_empty() && r.blowups.is_empty());
    assert!(r.w21_claim);
    // the arc's end slopes are +-1/sqrt(3): momentum +-1/2
    let exact = slope_of(circle_momentum(1.0, 0.0));
    assert!((finite_slope(r.endpoint_a) - exact).abs() < 1e-6);
    assert!((finite_slope(r.endpoint_b) + exact).abs() < 1e-6);
}

#[test]
fn zero_load_is_affine() {
    let f = CurvatureField::Constant(0.0);
    let u = solved(&f, &BoundaryCondition::Dirichlet { k0: 0.0, k1: 0.5 }, 50);
    let r = classify_solution(&u, &f, P_TOL).unwrap();
    assert!(r.shapes.iter().all(|s| s.shape == Shape::Affine), "{:?}", r.shapes);
    assert!((finite_slope(r.endpoint_a) - 0.5).abs() < 1e-9);
    assert!(r.w21_claim);
}

#[test]
fn step_load_jumps_down_at_the_sign_change() {
    let f = CurvatureField::Step { z: 0.5, left: 3.0, right: -3.0 };
    let bc = BoundaryCondition::Dirichlet { k0: 0.0, k1: -1.0 };
    let u = solved(&f, &bc, 1000);
    let r = classify_solution(&u, &f, P_TOL).unwrap();
    assert_eq!(r.taxonomy_case, TaxonomyCase::Iii);
    assert_eq!(r.jumps.len(), 1, "{:?}", r.jumps);
    let j = &r.jumps[0];
    assert_eq!(j.direction, JumpDirection::Down);
    assert!((j.location - 0.5).abs() <= 2.0 / 1000.0);
    let expected = -1.0 + 2.0 / 3.0 * 0.75f64.sqrt();
    assert!((j.height - expected).abs() < 2.0 * (1e-3f64).sqrt(), "{}", j.height);
    assert!(!r.w21_claim);
    assert_eq!(r.shapes[0].shape, Shape::Concave);
    assert_eq!(r.shapes[1].shape, Shape::Convex);
}

#[test]
fn semicircle_saturates_both_ends() {
    let f = CurvatureField::Constant(2.0);
    let u = solved(&f, &DIR0, 400);
    let r = classify_solution(&u, &f, P_TOL).unwrap();
    assert_eq!(r.endpoint_a, EndpointStatus::PlusInfinity);
    assert_eq!(r.endpoint_b, EndpointStatus::MinusInfinity);
    let b = boundary_attainment(&u, &f, &DIR0, P_TOL).unwrap();
    assert!(b.a.saturated && b.b.saturated);
    assert!(b.consistent);
}

#[test]
fn neumann_zero_flux_is_consistent() {
    let f = CurvatureField::Constant(0.0);
    let bc = BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 };
    let u = solved(&f, &bc, 40);
    let b = boundary_attainment(&u, &f, &bc, P_TOL).unwrap();
    assert!(b.consistent);
    assert!(b.a.flux_residual.unwrap() < 1e-12);
}

#[test]
fn identity_affine_is_zero() {
    let u = GridFunction::from_fn(unit(20), |x| 0.3 * x).unwrap();
    let r = u2_integrability(&u, P_TOL).unwrap();
    assert!(r.left < 1e-12 && r.right < 1e-12);
}

#[test]
fn identity_on_circle_matches_slope_difference() {
    let u = GridFunction::from_fn(unit(400), |x| circle_arc(1.0, x)).unwrap();
    let r = u2_integrability(&u, P_TOL).unwrap();
    // int |u''| = u'(0) - u'(1) = 2/sqrt(3) for the arc
    let exact = 2.0 * slope_of(0.5);
    assert!(r.gap < 1e-12);
    assert!((r.left - exact).abs() < 1e-4, "{} vs {exact}", r.left);
}

#[test]
fn identity_on_power_sign_turns_at_the_sign_change() {
    let f = CurvatureField::PowerSign { z: 0.5, amplitude: 2.0, alpha: 1.5 };
    let u = solved(&f, &DIR0, 400);
    let r = u2_integrability(&u, P_TOL).unwrap();
    assert!(r.gap <= 10.0 / 400.0, "{r:?}");
    assert!((r.z - 0.5).abs() <= 1.0 / 400.0);
}

#[test]
fn identity_rejects_jumps() {
    let f = CurvatureField::Step { z: 0.5, left: 3.0, right: -3.0 };
    let u = solved(&f, &BoundaryCondition::Dirichlet { k0: 0.0, k1: -1.0 }, 200);
    let atomized = classify_solution(&u, &f, P_TOL).unwrap().atomized;
    assert!(matches!(u2_integrability(&atomized, P_TOL), Err(AnalysisError::NotApplicable(_))));
}

fn instance(rhs: OdeRhs, interval: (f64, f64), initial: (f64, f64), comparison: ComparisonG) -> OdeInstance {
    OdeInstance { interval, rhs, initial, comparison, eps: 0.1 }
}

#[test]
fn linear_growth_stays_positive() {
    // v'' = v from v = 0, v' = 1 is sinh
    let inst = instance(OdeRhs::Power { c: 1.0, q: 1.0 }, (0.0, 1.0), (0.0, 1.0), ComparisonG::power(0.5, 2.0, 0.1));
    let r = positivity_probe(&inst, 200).unwrap();
    assert_eq!(r.outcome, PositivityOutcome::StronglyPositive);
    assert!(r.verdict.is_guaranteed());
    assert_eq!(r.status, ProbeStatus::Pass);
}

#[test]
fn dead_core_profile_solves_its_equation() {
    let d = DeadCore { c: 1.0, q: 1.0 / 3.0, t0: 0.3 };
    for t in [0.4, 0.6, 0.9] {
        let h = 1e-4;
        let v2 = (d.value(t + h) - 2.0 * d.value(t) + d.value(t - h)) / (h * h);
        assert!((v2 - d.value(t).powf(d.q)).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn dead_core_with_sublinear_load_is_no_contradiction() {
    let d = DeadCore { c: 1.0, q: 1.0 / 3.0, t0: 0.3 };
    let traj = d.trajectory((0.0, 1.0), 1000);
    // G'(s) = s^(1/3) = d/ds (3/4) s^(4/3): p = 4/3 < 2
    let inst = instance(OdeRhs::Power { c: 1.0, q: 1.0 / 3.0 }, (0.0, 1.0), (0.0, 0.0), ComparisonG::power(0.75, 4.0 / 3.0, 0.1));
    let r = positivity_probe_on(&inst, &traj).unwrap();
    match r.outcome {
        PositivityOutcome::DeadCoreFound { location } => assert!((location - 0.3).abs() <= 1e-3),
        other => panic!("{other:?}"),
    }
    assert!(!r.verdict.is_guaranteed());
    assert!(!r.contradiction);
    assert!(r.hypothesis_holds);
}

#[test]
fn dead_core_against_a_wrong_quadratic_comparison_fails_the_hypothesis() {
    let d = DeadCore { c: 1.0, q: 1.0 / 3.0, t0: 0.3 };
    let traj = d.trajectory((0.0, 1.0), 1000);
    let inst = instance(OdeRhs::Power { c: 1.0, q: 1.0 / 3.0 }, (0.0, 1.0), (0.0, 0.0), ComparisonG::power(0.5, 2.0, 0.1));
    let r = positivity_probe_on(&inst, &traj).unwrap();
    assert!(r.verdict.is_guaranteed());
    assert!(r.localization_entered && !r.hypothesis_holds);
    assert!(!r.contradiction);
}

#[test]
fn zero_trajectory_is_trivial() {
    let inst = instance(OdeRhs::Power { c: 1.0, q: 1.0 / 3.0 }, (0.0, 1.0), (0.0, 0.0), ComparisonG::power(0.5, 2.0, 0.1));
    assert!(matches!(positivity_probe(&inst, 100), Err(AnalysisError::TrivialInput(_))));
}

#[test]
fn exponential_never_vanishes_under_linear_osgood_bound() {
    let traj = OdeTrajectory::sample((-20.0, 0.0), 2000, f64::exp, f64::exp);
    let h = StateEnvelope::power(1.0, 1.0, 0.5);
    let r = osgood_probe(&h, &h, &traj).unwrap();
    assert!(r.verdict.is_guaranteed());
    assert_eq!(r.outcome, OsgoodOutcome::SignDefinite);
    assert!(!r.contradiction);
}

#[test]
fn square_root_bound_allows_a_sign_change() {
    let traj = OdeTrajectory::sample((-1.0, 1.0), 2001, |t| t * t.abs(), |t| 2.0 * t.abs());
    let h = StateEnvelope::power(2.0, 0.5, 0.5);
    let r = osgood_probe(&h, &h, &traj).unwrap();
    assert!(!r.verdict.is_guaranteed());
    match r.outcome {
        OsgoodOutcome::SignChangeFound { location } => assert!(location.abs() < 1e-3),
        other => panic!("{other:?}"),
    }
    assert!(!r.contradiction);
    // the same trajectory violates a linear bound
    let lin = StateEnvelope::power(1.0, 1.0, 0.5);
    assert!(matches!(osgood_probe(&lin, &lin, &traj), Err(AnalysisError::InequalityViolated { .. })));
}

#[test]
fn osgood_constants() {
    let h = StateEnvelope::power(1.0, 1.0, 0.5);
    let zero = OdeTrajectory::sample((0.0, 1.0), 10, |_| 0.0, |_| 0.0);
    assert!(matches!(osgood_probe(&h, &h, &zero), Err(AnalysisError::TrivialInput(_))));
    let one = OdeTrajectory::sample((0.0, 1.0), 10, |_| 1.0, |_| 0.0);
    assert_eq!(osgood_probe(&h, &h, &one).unwrap().outcome, OsgoodOutcome::SignDefinite);
}

fn same_status(x: EndpointStatus, y: EndpointStatus) -> bool {
    match (x, y) {
        (EndpointStatus::FiniteSlope { value: a }, EndpointStatus::FiniteSlope { value: b }) => {
            (a - b).abs() <= 1e-9 * (1.0 + a.abs())
        }
        (a, b) => a == b,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sign_flip_mirrors_the_report(lam in 0.2f64..1.8, k0 in -0.3f64..0.3, k1 in -0.3f64..0.3, alpha in 0.0f64..2.0, which in 0usize..2) {
        let f = if which == 0 {
            CurvatureField::Constant(lam)
        } else {
            CurvatureField::PowerSign { z: 0.5, amplitude: lam, alpha }
        };
        let bc = BoundaryCondition::Dirichlet { k0, k1 };
        let u = solved(&f, &bc, 200);
        let v = solved(&f.negated(), &bc.negated(), 200);
        let r = classify_solution(&u, &f, P_TOL).unwrap();
        let m = classify_solution(&v, &f.negated(), P_TOL).unwrap();
        let (shapes, ea, eb) = r.mirrored_summary();
        let got: Vec<Shape> = m.shapes.iter().map(|s| s.shape).collect();
        prop_assert_eq!(got, shapes);
        prop_assert!(same_status(m.endpoint_a, ea), "{:?} vs {:?}", m.endpoint_a, ea);
        prop_assert!(same_status(m.endpoint_b, eb), "{:?} vs {:?}", m.endpoint_b, eb);
        prop_assert_eq!(m.taxonomy_case == TaxonomyCase::I, r.taxonomy_case == TaxonomyCase::Ii);
    }
}
