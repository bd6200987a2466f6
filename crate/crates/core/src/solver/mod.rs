//! Discrete bounded-variation solutions: energy minimisation with a frozen load,
//! the outer load iteration, a momentum integrator and the weak-form verifier.

mod energy;
mod momentum;
mod reduce;
mod weak;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bc::BoundaryCondition;
use crate::error::CoreError;
use crate::field::CurvatureField;
use crate::grid::{Grid, GridFunction};

pub use energy::{DiscreteEnergy, Stationarity};
pub use momentum::{momentum_integrate, MomentumEvent, Trajectory};
pub use reduce::{minimize_energy, Minimizer, UNBOUNDED_LIMIT};
pub use weak::{verify_weak_form, AtomCheck, WeakFormReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveParams {
    pub outer_max: usize,
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub damping: f64,
    pub p_tol: f64,
    pub s_range: [f64; 2],
}

impl Default for SolveParams {
    fn default() -> Self {
        Self { outer_max: 50, outer_tol: 1e-9, inner_tol: 1e-12, damping: 0.5, p_tol: 1e-4, s_range: [-1e6, 1e6] }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidParams(m.to_string()));
        if self.outer_max == 0 {
            return bad("outer_max must be >= 1");
        }
        if !(self.outer_tol > 0.0 && self.inner_tol > 0.0 && self.p_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.s_range[0] < self.s_range[1]) {
            return bad("s_range must satisfy s_min < s_max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("inner solver stalled after {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("energy unbounded below (no discrete minimiser): {reason}")]
    UnboundedBelow { reason: String },
    #[error("outer iteration did not converge in {iterations} steps (last change {last_change:e})")]
    OuterNoConvergence { iterations: usize, last_change: f64, previous: Box<GridFunction>, last: Box<GridFunction> },
    #[error("iterate value {value} at x = {x} leaves s_range [{lo}, {hi}]")]
    RangeExceeded { x: f64, value: f64, lo: f64, hi: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy_initial: f64,
    pub energy: f64,
    pub sup_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: GridFunction,
    /// Cell momenta of the final inner minimisation.
    pub p: Vec<f64>,
    pub outer_iterations: usize,
    pub sup_change: f64,
    pub detachment: (f64, f64),
    pub stationarity: Stationarity,
    pub trace: Vec<TraceRow>,
}

fn check_range(u: &[f64], grid: &Grid, params: &SolveParams) -> Result<(), SolveError> {
    let [lo, hi] = params.s_range;
    for (i, &v) in u.iter().enumerate() {
        if !(v >= lo && v <= hi) {
            return Err(SolveError::RangeExceeded { x: grid.x(i), value: v, lo, hi });
        }
    }
    Ok(())
}

fn load_of(f: &CurvatureField, grid: &Grid, u: &[f64]) -> Result<Vec<f64>, SolveError> {
    Ok(u.iter().enumerate().map(|(i, &s)| f.eval(grid.x(i), s)).collect::<Result<Vec<_>, _>>()?)
}

/// For Neumann and periodic data with a state-dependent load, the shift `m` making
/// `h sum w_i f(x_i, u_i + m)` equal to `target`, found by expanding bracket and
/// bisection.
fn compatible_shift(
    f: &CurvatureField,
    grid: &Grid,
    u: &[f64],
    target: f64,
    params: &SolveParams,
) -> Result<f64, SolveError> {
    let h = grid.h();
    let g = |m: f64| -> Result<f64, SolveError> {
        let mut s = 0.0;
        for (i, &v) in u.iter().enumerate() {
            s += h * grid.trapezoid_weight(i) * f.eval(grid.x(i), v + m)?;
        }
        Ok(s - target)
    };
    let g0 = g(0.0)?;
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut step = 1e-3;
    let bracket = loop {
        let mut found = None;
        for m in [step, -step] {
            if umin + m < params.s_range[0] || umax + m > params.s_range[1] {
                continue;
            }
            if let Ok(gm) = g(m) {
                if gm.signum() != g0.signum() {
                    found = Some(m);
                    break;
                }
            }
        }
        if let Some(m) = found {
            break m;
        }
        step *= 2.0;
        if step > UNBOUNDED_LIMIT {
            return Err(SolveError::UnboundedBelow {
                reason: "no additive shift makes the load compatible with the flux data".into(),
            });
        }
    };
    let (mut lo, mut hi) = if bracket > 0.0 { (0.0, bracket) } else { (bracket, 0.0) };
    let rising = if bracket > 0.0 { g0 < 0.0 } else { g0 > 0.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if (gm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Computes a discrete solution of `-(psi(u'))' = f(x, u)` with boundary data `bc`.
///
/// The load is frozen at the current iterate and the energy minimised exactly; the
/// iterate is then relaxed by `params.damping`. The loop stops when the map moves
/// the iterate by less than `outer_tol` and returns that image. An s-independent
/// load takes exactly one outer step.
pub fn solve(
    f: &CurvatureField,
    bc: &BoundaryCondition,
    grid: Grid,
    params: &SolveParams,
) -> Result<Solution, SolveError> {
    solve_from(f, bc, &GridFunction::zeros(grid), params)
}

/// [`solve`] from a supplied initial guess.
pub fn solve_from(
    f: &CurvatureField,
    bc: &BoundaryCondition,
    initial: &GridFunction,
    params: &SolveParams,
) -> Result<Solution, SolveError> {
    params.validate()?;
    bc.validate()?;
    f.validate()?;
    let grid = *initial.grid();
    let state_dependent = f.depends_on_state();
    let mut u = initial.rendered();
    let mut trace = Vec::new();
    let mut previous = u.clone();
    let mut last_change = f64::INFINITY;

    for iteration in 1..=params.outer_max {
        check_range(&u, &grid, params)?;
        let mut base = u.clone();
        if state_dependent {
            let target = match *bc {
                BoundaryCondition::Neumann { k0, k1 } => Some(k0 - k1),
                BoundaryCondition::Periodic => Some(0.0),
                _ => None,
            };
            if let Some(t) = target {
                let m = compatible_shift(f, &grid, &u, t, params)?;
                base.iter_mut().for_each(|v| *v += m);
                check_range(&base, &grid, params)?;
            }
        }
        let load = load_of(f, &grid, &base)?;
        let energy = DiscreteEnergy::new(grid, load, *bc);
        let start = GridFunction::new(grid, base.clone())?;
        let min = minimize_energy(&energy, &start, params)?;
        let image = min.v.values().to_vec();
        let change = image.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        trace.push(TraceRow { iteration, energy_initial: min.energy_initial, energy: min.energy, sup_change: change });
        last_change = change;
        if !state_dependent || change < params.outer_tol {
            check_range(&image, &grid, params)?;
            let stationarity = energy.stationarity(&image);
            return Ok(Solution {
                u: min.v,
                p: min.p,
                outer_iterations: iteration,
                sup_change: change,
                detachment: min.detachment,
                stationarity,
                trace,
            });
        }
        previous = u.clone();
        let theta = params.damping;
        u = u.iter().zip(&image).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sup > UNBOUNDED_LIMIT {
            return Err(SolveError::UnboundedBelow { reason: format!("outer iterate sup-norm {sup:e}") });
        }
    }
    Err(SolveError::OuterNoConvergence {
        iterations: params.outer_max,
        last_change,
        previous: Box::new(GridFunction::new(grid, previous)?),
        last: Box::new(GridFunction::new(grid, u)?),
    })
}
