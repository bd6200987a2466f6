//! Direct integration of `p' = -f(x, u)`, `u' = psi_inv(p)` from the left endpoint.
//!
//! Adaptive Dormand-Prince 5(4) stepping, forced to land on every grid node so the
//! trajectory can be compared node by node with the energy minimiser.

use serde::{Deserialize, Serialize};

use crate::field::CurvatureField;
use crate::grid::{Grid, GridFunction, MomentumField};

use super::SolveError;

const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-13;

/// The first point where `|p|` reaches `1 - p_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumEvent {
    pub x: f64,
    /// `+1` or `-1`.
    pub sign: f64,
    pub u: f64,
    pub p: f64,
    /// False when the step size underflowed before the event was bracketed.
    pub confident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid,
    /// Nodal values up to (excluding) the event, or over the whole grid.
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub event: Option<MomentumEvent>,
    pub steps: usize,
}

impl Trajectory {
    /// Whole-grid nodal data; `None` when an event stopped the integration.
    pub fn complete(&self) -> Option<(GridFunction, MomentumField)> {
        if self.event.is_some() {
            return None;
        }
        let u = GridFunction::new(self.grid, self.u.clone()).ok()?;
        Some((u, MomentumField { grid: self.grid, p: self.p.clone() }))
    }
}

type State = [f64; 2];

fn rhs(f: &CurvatureField, x: f64, y: State) -> Result<Option<State>, SolveError> {
    let p = y[1];
    if !(p.abs() < 1.0) {
        return Ok(None);
    }
    let slope = p / ((1.0 - p) * (1.0 + p)).sqrt();
    Ok(Some([slope, -f.eval(x, y[0])?]))
}

// Dormand-Prince tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One trial step; `None` when a stage leaves `|p| < 1`.
fn dp_step(f: &CurvatureField, x: f64, y: State, s: f64) -> Result<Option<(State, f64)>, SolveError> {
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += s * A[i][j] * kj[0];
            yi[1] += s * A[i][j] * kj[1];
        }
        match rhs(f, x + C[i] * s, yi)? {
            Some(d) => k[i] = d,
            None => return Ok(None),
        }
    }
    let mut y5 = y;
    let mut y4 = y;
    for i in 0..7 {
        for c in 0..2 {
            y5[c] += s * B5[i] * k[i][c];
            y4[c] += s * B4[i] * k[i][c];
        }
    }
    let mut err = 0.0f64;
    for c in 0..2 {
        let sc = ATOL + RTOL * y[c].abs().max(y5[c].abs());
        err = err.max(((y5[c] - y4[c]) / sc).abs());
    }
    Ok(Some((y5, err)))
}

/// Integrates from `(a, u0, p0)` across `grid`, stopping at the first `|p| >= 1 - p_tol`.
pub fn momentum_integrate(
    f: &CurvatureField,
    u0: f64,
    p0: f64,
    grid: Grid,
    p_tol: f64,
) -> Result<Trajectory, SolveError> {
    if !(p0.abs() < 1.0) {
        return Err(SolveError::InvalidParams(format!("initial momentum {p0} must satisfy |p0| < 1")));
    }
    let band = 1.0 - p_tol;
    let min_step = 1e-14 * (grid.b() - grid.a());
    let mut us = vec![u0];
    let mut ps = vec![p0];
    let mut y: State = [u0, p0];
    let mut x = grid.a();
    let mut s = grid.h() / 4.0;
    let mut steps = 0usize;
    if p0.abs() >= band {
        let event = MomentumEvent { x, sign: p0.signum(), u: u0, p: p0, confident: true };
        return Ok(Trajectory { grid, u: us, p: ps, event: Some(event), steps });
    }
    for i in 1..=grid.n() {
        let target = grid.x(i);
        while x < target {
            let trial = s.min(target - x);
            let last = trial >= target - x;
            match dp_step(f, x, y, trial)? {
                Some((ynew, err)) if err <= 1.0 && ynew[1].abs() < band => {
                    x = if last { target } else { x + trial };
                    y = ynew;
                    steps += 1;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    s = (trial * grow).max(min_step);
                }
                Some((_, err)) if err <= 1.0 => {
                    // accepted step crosses the band: locate the crossing
                    let ev = locate_event(f, x, y, trial, band)?;
                    return Ok(Trajectory { grid, u: us, p: ps, event: Some(ev), steps });
                }
                outcome => {
                    // error too large, or a stage left |p| < 1
                    let shrink = match outcome {
                        Some((_, err)) => (0.9 * err.powf(-0.25)).clamp(0.1, 0.5),
                        None => 0.5,
                    };
                    s = trial * shrink;
                    if s < min_step {
                        let slope_sign = if y[1] != 0.0 { y[1].signum() } else { 1.0 };
                        let ev = MomentumEvent { x, sign: slope_sign, u: y[0], p: y[1], confident: false };
                        return Ok(Trajectory { grid, u: us, p: ps, event: Some(ev), steps });
                    }
                }
            }
        }
        us.push(y[0]);
        ps.push(y[1]);
    }
    Ok(Trajectory { grid, u: us, p: ps, event: None, steps })
}

/// Bisects the step length for the first `|p| >= band` inside `(x, x + s]`.
fn locate_event(f: &CurvatureField, x: f64, y: State, s: f64, band: f64) -> Result<MomentumEvent, SolveError> {
    let (mut lo, mut hi) = (0.0, s);
    let mut best = y;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match dp_step(f, x, y, mid)? {
            Some((ym, _)) if ym[1].abs() < band => {
                lo = mid;
                best = ym;
            }
            _ => hi = mid,
        }
    }
    let confident = hi - lo <= 1e-12 * (1.0 + x.abs());
    Ok(MomentumEvent { x: x + hi, sign: best[1].signum(), u: best[0], p: best[1], confident })
}
