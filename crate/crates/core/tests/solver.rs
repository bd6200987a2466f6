mod common;

use common::*;
use curvlab::solver::{
    minimize_energy, momentum_integrate, solve, verify_weak_form, DiscreteEnergy, SolveError,
    SolveParams,
};
use curvlab::{BoundaryCondition, CurvatureField, Grid, GridFunction, Jump};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(n: usize) -> Grid {
    Grid::new(0.0, 1.0, n).unwrap()
}

const DIR0: BoundaryCondition = BoundaryCondition::Dirichlet { k0: 0.0, k1: 0.0 };

fn arc_error(lam: f64, n: usize) -> f64 {
    let g = unit(n);
    let sol = solve(&CurvatureField::Constant(lam), &DIR0, g, &SolveParams::default()).unwrap();
    let exact: Vec<f64> = g.nodes().iter().map(|x| circle_arc(lam, *x)).collect();
    sup_diff(sol.u.values(), &exact)
}

#[test]
fn zero_load_dirichlet_gives_zero() {
    let g = unit(40);
    let e = DiscreteEnergy::new(g, vec![0.0; 41], DIR0);
    let v0 = GridFunction::from_fn(g, |x| (7.0 * x).sin()).unwrap();
    let m = minimize_energy(&e, &v0, &SolveParams::default()).unwrap();
    assert!(m.v.values().iter().all(|v| v.abs() < 1e-15));
    assert!(m.energy <= m.energy_initial);
}

#[test]
fn zero_load_neumann_keeps_constant() {
    let g = unit(40);
    let e = DiscreteEnergy::new(g, vec![0.0; 41], BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 });
    let v0 = GridFunction::from_fn(g, |_| 5.0).unwrap();
    let m = minimize_energy(&e, &v0, &SolveParams::default()).unwrap();
    assert!(m.v.values().iter().all(|v| (v - 5.0).abs() < 1e-14));
}

#[test]
fn circle_arc_within_tolerance() {
    for lam in [0.5, 1.0, 1.9] {
        let err = arc_error(lam, 1000);
        assert!(err <= 1e-3, "lam = {lam}: {err}");
    }
}

#[test]
fn mesh_convergence_on_circle() {
    let (e250, e1000) = (arc_error(1.0, 250), arc_error(1.0, 1000));
    assert!(e250 / e1000 >= 3.5, "{e250} / {e1000}");
}

#[test]
fn linear_dirichlet_with_zero_load() {
    let g = unit(64);
    let bc = BoundaryCondition::Dirichlet { k0: 1.0, k1: -2.0 };
    let sol = solve(&CurvatureField::Constant(0.0), &bc, g, &SolveParams::default()).unwrap();
    let exact: Vec<f64> = g.nodes().iter().map(|x| 1.0 - 3.0 * x).collect();
    assert!(sup_diff(sol.u.values(), &exact) < 1e-13);
    assert_eq!(sol.detachment, (0.0, 0.0));
}

#[test]
fn stationarity_holds_for_constant_load() {
    let sol = solve(&CurvatureField::Constant(1.5), &DIR0, unit(500), &SolveParams::default()).unwrap();
    assert!(sol.stationarity.within(1e-12), "{:?}", sol.stationarity);
    assert_eq!(sol.outer_iterations, 1);
}

#[test]
fn energy_decreases_and_is_globally_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = unit(200);
    let f = CurvatureField::parse("3*cos(6*x) + 1").unwrap();
    for bc in [DIR0, BoundaryCondition::Dirichlet { k0: 0.3, k1: -0.2 }] {
        let load: Vec<f64> = g.nodes().iter().map(|x| f.eval(*x, 0.0).unwrap()).collect();
        let e = DiscreteEnergy::new(g, load, bc);
        let noise: Vec<f64> = (0..=g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v0 = GridFunction::new(g, noise).unwrap();
        let m = minimize_energy(&e, &v0, &SolveParams::default()).unwrap();
        assert!(m.energy <= m.energy_initial);
        let base = e.value(m.v.values());
        for _ in 0..100 {
            let mut v = m.v.values().to_vec();
            let i = rng.gen_range(0..=g.n());
            v[i] += if rng.gen_bool(0.5) { 1e-3 } else { -1e-3 };
            assert!(e.value(&v) >= base - 1e-14, "node {i}: {} < {base}", e.value(&v));
        }
    }
}

#[test]
fn constant_load_neumann_has_no_solution() {
    let r = solve(
        &CurvatureField::Constant(1.0),
        &BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 },
        unit(100),
        &SolveParams::default(),
    );
    assert!(matches!(r, Err(SolveError::UnboundedBelow { .. })), "{r:?}");
}

#[test]
fn strong_step_load_under_neumann_data_has_no_solution() {
    // int_0^x f reaches 1.5 > 1 at x = 1/2: the energy is unbounded below along
    // t * 1_(0, 1/2) and no bounded-variation solution exists
    let f = CurvatureField::Step { z: 0.5, left: 3.0, right: -3.0 };
    let r = solve(&f, &BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 }, unit(1000), &SolveParams::default());
    assert!(matches!(r, Err(SolveError::UnboundedBelow { .. })), "{r:?}");
}

#[test]
fn step_load_with_dirichlet_data_jumps() {
    // p(x) = c - F(x) with F the primitive of f; the constraint |p| <= 1 pins c = 1/2
    // and the smooth parts only descend by (2/3) sqrt(3/4), so the remaining drop
    // -1 + (2/3) sqrt(3/4) is a jump at x = 1/2.
    let f = CurvatureField::Step { z: 0.5, left: 3.0, right: -3.0 };
    let bc = BoundaryCondition::Dirichlet { k0: 0.0, k1: -1.0 };
    let g = unit(1000);
    let sol = solve(&f, &bc, g, &SolveParams::default()).unwrap();
    let inc: Vec<f64> = sol.u.values().windows(2).map(|w| w[1] - w[0]).collect();
    let k = (0..inc.len()).fold(0, |b, i| if inc[i].abs() > inc[b].abs() { i } else { b });
    // the atom may share two cells when x = 1/2 is a node
    let second = if inc[k - 1].abs() > inc[k + 1].abs() { k - 1 } else { k + 1 };
    let d = inc[k] + inc[second];
    let smooth = 2.0 / 3.0 * 0.75f64.sqrt();
    let expected = -1.0 + smooth;
    // near |p| = 1 the slope sums converge like sqrt(h)
    let tol = 2.0 * g.h().sqrt();
    assert!((g.mid(k) - 0.5).abs() <= g.h(), "steep cell at {}", g.mid(k));
    assert!((d - expected).abs() < tol, "jump {d} vs {expected}");
    assert!((sol.p[k] + 1.0).abs() < 1e-4);
    let left = sol.u.values()[k.min(second)];
    assert!((left + smooth / 2.0).abs() < tol, "{left}");
}

#[test]
fn detached_dirichlet_trace() {
    // zero load: any straight line has |p| < 1, so the traces stay attached; a
    // large load pushes a trace off: f = 2.5 on (0, 1) cannot keep |p| <= 1 with
    // both ends attached at height 0 and the energy is unbounded below
    let r = solve(&CurvatureField::Constant(2.5), &DIR0, unit(200), &SolveParams::default());
    assert!(matches!(r, Err(SolveError::UnboundedBelow { .. })), "{r:?}");

    // f = 1.5, kappa1 far above: the right trace detaches (v_n < k1, sigma_n = -1)
    let bc = BoundaryCondition::Dirichlet { k0: 0.0, k1: 10.0 };
    let g = unit(400);
    let sol = solve(&CurvatureField::Constant(1.5), &bc, g, &SolveParams::default()).unwrap();
    let (t0, t1) = sol.detachment;
    assert!(t0 >= 0.0 && t1 <= 0.0 && t0 - t1 > 1.0, "{:?}", sol.detachment);
    let w = verify_weak_form(&sol.u, &CurvatureField::Constant(1.5), &bc, 1e-9, 1e-4).unwrap();
    assert!(w.max_residual < 1e-9, "{w:?}");
}

#[test]
fn periodic_cosine_load() {
    // p(x) = -sin(2 pi x) / (2 pi) closes the loop by odd symmetry
    let g = unit(400);
    let f = CurvatureField::parse("cos(6.283185307179586*x)").unwrap();
    let sol = solve(&f, &BoundaryCondition::Periodic, g, &SolveParams::default()).unwrap();
    let tau = std::f64::consts::TAU;
    let slope = |t: f64| slope_of(-(tau * t).sin() / tau);
    let mut exact: Vec<f64> = g.nodes().iter().map(|x| simpson(slope, 0.0, *x, 200)).collect();
    let shift = exact.iter().sum::<f64>() / exact.len() as f64;
    exact.iter_mut().for_each(|v| *v -= shift);
    let got = sol.u.values();
    let gshift = got.iter().sum::<f64>() / got.len() as f64;
    let centred: Vec<f64> = got.iter().map(|v| v - gshift).collect();
    assert!(sup_diff(&centred, &exact) < 1e-5, "{}", sup_diff(&centred, &exact));
    let w = verify_weak_form(&sol.u, &f, &BoundaryCondition::Periodic, 1e-9, 1e-4).unwrap();
    assert!(w.pass, "{w:?}");
}

#[test]
fn robin_zero_load_is_linear() {
    // u = alpha + beta x with psi(beta) + alpha = 1/2 and psi(beta) + alpha + beta = 1/5
    let bc = BoundaryCondition::Robin { l0: 1.0, k0: 0.5, l1: 1.0, k1: 0.2 };
    let beta: f64 = -0.3;
    let alpha = 0.5 - beta / (1.0 + beta * beta).sqrt();
    let g = unit(100);
    let sol = solve(&CurvatureField::Constant(0.0), &bc, g, &SolveParams::default()).unwrap();
    let exact: Vec<f64> = g.nodes().iter().map(|x| alpha + beta * x).collect();
    assert!(sup_diff(sol.u.values(), &exact) < 1e-12, "{}", sup_diff(sol.u.values(), &exact));
}

#[test]
fn state_dependent_load_matches_shooting() {
    let g = unit(400);
    let f = CurvatureField::parse("1 - s").unwrap();
    let sol = solve(&f, &DIR0, g, &SolveParams::default()).unwrap();
    assert!(sol.outer_iterations > 1);
    let oracle = shoot_dirichlet(|_, u| 1.0 - u, 0.0, 0.0, 400);
    let gap = sup_diff(sol.u.values(), &oracle);
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn state_dependent_neumann_fixes_the_constant() {
    // f = x - 1/2 - s with zero flux: compatibility forces mean(u) ~ 0 and the
    // solution is unique
    let g = unit(200);
    let f = CurvatureField::parse("x - 0.5 - s").unwrap();
    let sol = solve(&f, &BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 }, g, &SolveParams::default()).unwrap();
    let w = verify_weak_form(&sol.u, &f, &BoundaryCondition::Neumann { k0: 0.0, k1: 0.0 }, 1e-7, 1e-4).unwrap();
    assert!(w.pass, "{w:?}");
}

#[test]
fn outer_budget_exhaustion_reports_both_iterates() {
    let params = SolveParams { outer_max: 3, ..SolveParams::default() };
    let r = solve(&CurvatureField::parse("1 - s").unwrap(), &DIR0, unit(50), &params);
    match r {
        Err(SolveError::OuterNoConvergence { iterations, previous, last, .. }) => {
            assert_eq!(iterations, 3);
            assert_ne!(previous.values(), last.values());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn range_exceeded() {
    let params = SolveParams { s_range: [-0.01, 0.01], ..SolveParams::default() };
    let r = solve(&CurvatureField::parse("1 + s").unwrap(), &DIR0, unit(50), &params);
    assert!(matches!(r, Err(SolveError::RangeExceeded { .. })), "{r:?}");
}

#[test]
fn solves_are_bitwise_deterministic() {
    let f = CurvatureField::parse("sin(3*x) + 0.2*s").unwrap();
    let a = solve(&f, &DIR0, unit(300), &SolveParams::default()).unwrap();
    let b = solve(&f, &DIR0, unit(300), &SolveParams::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn momentum_integrator_agrees_with_minimiser() {
    let g = unit(500);
    for lam in [0.5, 1.0, 1.9] {
        let sol = solve(&CurvatureField::Constant(lam), &DIR0, g, &SolveParams::default()).unwrap();
        let t = momentum_integrate(&CurvatureField::Constant(lam), 0.0, lam / 2.0, g, 1e-4).unwrap();
        assert!(t.event.is_none());
        assert!(sup_diff(&t.u, sol.u.values()) <= 10.0 * g.h());
        for (i, p) in t.p.iter().enumerate() {
            assert!((p - circle_momentum(lam, g.x(i))).abs() < 1e-9);
        }
    }
}

#[test]
fn weak_form_of_the_closed_form_arc() {
    let g = unit(1000);
    let u = GridFunction::from_fn(g, |x| circle_arc(1.0, x)).unwrap();
    let w = verify_weak_form(&u, &CurvatureField::Constant(1.0), &DIR0, 1e-6, 1e-4).unwrap();
    assert!(w.max_residual <= 1e-6, "{w:?}");
    assert!(w.pass);
}

#[test]
fn weak_form_with_an_atomised_jump() {
    let f = CurvatureField::Step { z: 0.5, left: 3.0, right: -3.0 };
    let bc = BoundaryCondition::Dirichlet { k0: 0.0, k1: -1.0 };
    let g = unit(1000);
    let sol = solve(&f, &bc, g, &SolveParams::default()).unwrap();
    let v = sol.u.values();
    let inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let k = (0..inc.len()).fold(0, |b, i| if inc[i].abs() > inc[b].abs() { i } else { b });
    // replace the steep increment by the mean of its neighbours; the rest is an atom
    let smooth = 0.5 * (inc[k - 1] + inc[k + 1]);
    let height = inc[k] - smooth;
    let mut values = v.to_vec();
    for x in values.iter_mut().skip(k + 1) {
        *x -= height;
    }
    let u = GridFunction::with_jumps(g, values, vec![Jump { index: k, height }]).unwrap();
    let w = verify_weak_form(&u, &f, &bc, 1e-6, 1e-4).unwrap();
    assert_eq!(w.atoms.len(), 1);
    assert!(w.atoms[0].admissible, "{w:?}");
    assert!((w.atoms[0].flux + 1.0).abs() < 1e-4);
    assert!(w.pass, "{w:?}");
}

#[test]
fn semicircle_at_the_blow_up_frontier() {
    // lam = 2 leaves exactly one admissible momentum constant; the solution is the
    // radius-1/2 semicircle with vertical tangents at both ends
    let g = unit(1000);
    let sol = solve(&CurvatureField::Constant(2.0), &DIR0, g, &SolveParams::default()).unwrap();
    assert!((sol.p[0] - (1.0 - g.h())).abs() < 1e-12);
    assert!((sol.p[g.n() - 1] + 1.0 - g.h()).abs() < 1e-12);
    let exact: Vec<f64> = g.nodes().iter().map(|x| (0.25 - (x - 0.5) * (x - 0.5)).max(0.0).sqrt()).collect();
    // the endpoint cells carry the O(sqrt h) error of the vertical tangent
    assert!(sup_diff(sol.u.values(), &exact) < 2.0 * g.h().sqrt());
    assert!(matches!(
        solve(&CurvatureField::Constant(2.0 + 1e-9), &DIR0, g, &SolveParams::default()),
        Err(SolveError::UnboundedBelow { .. })
    ));
}
