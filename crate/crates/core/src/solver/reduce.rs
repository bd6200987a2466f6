//! Exact minimisation of the frozen-load energy through its momentum variable.
//!
//! Stationarity at an interior node reads `p_{i-1} - p_i = h L_i`, so every cell
//! momentum is fixed by one scalar `c = p_0`: `p_i = c - P_i` with
//! `P_i = h (L_1 + ... + L_i)`. The slopes are `psi_inv(p_i)` and the endpoint
//! difference `D(c) = h sum psi_inv(c - P_i)` is strictly increasing on the open
//! interval where every `|p_i| < 1`. Each boundary condition then reduces to a
//! monotone (or sign-changing) scalar equation in `c`, solved by bisection to
//! rounding level. The energy is convex for the Dirichlet, Neumann and periodic
//! variants, so the stationary point is the global discrete minimiser.

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::grid::GridFunction;
use crate::psi::psi_inv;

use super::energy::DiscreteEnergy;
use super::{SolveError, SolveParams};

/// Iterates whose sup-norm exceeds this signal nonexistence.
pub const UNBOUNDED_LIMIT: f64 = 1e6;

/// Result of one inner minimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimizer {
    pub v: GridFunction,
    /// Exact cell momenta `c - P_k` (more accurate than `psi` of the increments in
    /// steep cells).
    pub p: Vec<f64>,
    pub energy_initial: f64,
    pub energy: f64,
    /// Offsets `v_0 - k0`, `v_n - k1` of a detached Dirichlet trace (zero otherwise).
    pub detachment: (f64, f64),
    pub bisection_steps: usize,
}

struct Reduction {
    /// `P_k` for `k = 0..n-1` (`P_0 = 0`), offset by the boundary shift.
    prefix: Vec<f64>,
    h: f64,
    /// Open interval of `c` with every `|c - P_k| < 1`.
    lo: f64,
    hi: f64,
}

impl Reduction {
    fn new(e: &DiscreteEnergy, shift: f64) -> Self {
        let h = e.grid.h();
        let n = e.grid.n();
        let mut prefix = Vec::with_capacity(n);
        let mut acc = 0.0;
        prefix.push(shift);
        for i in 1..n {
            acc += h * e.load[i];
            prefix.push(shift + acc);
        }
        let maxp = prefix.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let minp = prefix.iter().cloned().fold(f64::INFINITY, f64::min);
        Self { prefix, h, lo: maxp - 1.0, hi: minp + 1.0 }
    }

    fn momenta(&self, c: f64) -> Vec<f64> {
        self.prefix.iter().map(|q| c - q).collect()
    }

    /// `D(c)`; `-inf`/`+inf` outside the open feasible interval.
    fn d(&self, c: f64) -> f64 {
        if c <= self.lo {
            return f64::NEG_INFINITY;
        }
        if c >= self.hi {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for q in &self.prefix {
            match psi_inv(c - q) {
                Ok(v) => s += v,
                Err(_) => return if c - q > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
            }
        }
        self.h * s
    }

    fn increments(&self, c: f64) -> Vec<f64> {
        self.prefix.iter().map(|q| self.h * psi_inv(c - q).unwrap_or(f64::NAN)).collect()
    }
}

/// Bisection for an increasing-crossing of `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`
/// (or the reverse); stops when the bracket no longer shrinks in floating point.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> Result<(f64, usize), SolveError> {
    let glo = g(lo);
    let rising = glo <= 0.0;
    for step in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((mid, step));
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok((mid, step));
        }
        if (gm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(SolveError::MaxIterations { iterations: 2000 })
}

/// Builds nodal values from `v_0` and cell increments, putting the residual
/// endpoint mismatch (if a target is given) into the steepest cell.
fn assemble(v0: f64, mut inc: Vec<f64>, target_vn: Option<f64>) -> Vec<f64> {
    if let Some(t) = target_vn {
        let sum: f64 = inc.iter().sum();
        let k = inc
            .iter()
            .enumerate()
            .fold(0, |best, (i, d)| if d.abs() > inc[best].abs() { i } else { best });
        inc[k] += (t - v0) - sum;
    }
    let mut v = Vec::with_capacity(inc.len() + 1);
    let mut acc = v0;
    v.push(acc);
    for d in inc {
        acc += d;
        v.push(acc);
    }
    v
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn unbounded(reason: impl Into<String>) -> SolveError {
    SolveError::UnboundedBelow { reason: reason.into() }
}

/// Minimises `e` exactly. `v0` supplies the reported initial energy and, for the
/// Neumann and periodic variants, the additive constant (its mean is preserved).
pub fn minimize_energy(e: &DiscreteEnergy, v0: &GridFunction, _params: &SolveParams) -> Result<Minimizer, SolveError> {
    let grid = e.grid;
    let n = grid.n();
    if v0.grid() != &grid {
        return Err(SolveError::Core(crate::CoreError::InvalidGridFunction(
            "initial guess lives on a different grid".into(),
        )));
    }
    if e.load.len() != n + 1 || e.load.iter().any(|l| !l.is_finite()) {
        return Err(SolveError::Core(crate::CoreError::InvalidGridFunction(
            "load must have n + 1 finite values".into(),
        )));
    }
    let start = v0.rendered();
    let energy_initial = e.value(&start);
    let h = grid.h();
    let (l0, ln) = (e.load[0], e.load[n]);
    let compat_tol = 1e-10 * (1.0 + e.load.iter().map(|l| h * l.abs()).sum::<f64>());

    let (values, p, detachment, steps) = match e.bc {
        BoundaryCondition::Dirichlet { k0, k1 } => {
            let r = Reduction::new(e, 0.0);
            let pn = r.prefix[n - 1];
            // closed ranges of c allowed by the boundary subgradients
            let s_lo = (-1.0 - 0.5 * h * l0).max(pn + 0.5 * h * ln - 1.0);
            let s_hi = (1.0 - 0.5 * h * l0).min(pn + 0.5 * h * ln + 1.0);
            let mut c_lo = s_lo.max(r.lo);
            let mut c_hi = s_hi.min(r.hi);
            // at the blow-up frontier the admissible range collapses to one point;
            // the two bounds are computed along different sums and may cross by rounding
            let slack = 8.0 * f64::EPSILON * (1.0 + s_lo.abs().max(s_hi.abs()));
            if c_lo > c_hi && c_lo - c_hi <= slack {
                let mid = 0.5 * (c_lo + c_hi);
                c_lo = mid;
                c_hi = mid;
            }
            if c_lo > c_hi || (c_lo == c_hi && !(c_lo > r.lo && c_lo < r.hi)) {
                return Err(unbounded(format!(
                    "no admissible boundary momentum: load integral {} exceeds the flux budget",
                    e.load_integral()
                )));
            }
            let target = k1 - k0;
            let (d_lo, d_hi) = (r.d(c_lo), r.d(c_hi));
            let dtol = 1e-12 * (1.0 + target.abs());
            let (c, t0, t1, steps) = if target < d_lo - dtol {
                // v_n - v_0 = D(c_lo) > target: t1 - t0 = D - target > 0
                let excess = d_lo - target;
                let at_a = (c_lo - (-1.0 - 0.5 * h * l0)).abs() <= slack; // sigma_0 = -1: v_0 below k0
                let at_b = (c_lo - (pn + 0.5 * h * ln - 1.0)).abs() <= slack; // sigma_n = +1: v_n above k1
                let (t0, t1) = match (at_a, at_b) {
                    (true, true) => (-0.5 * excess, 0.5 * excess),
                    (true, false) => (-excess, 0.0),
                    _ => (0.0, excess),
                };
                (c_lo, t0, t1, 0)
            } else if target > d_hi + dtol {
                let deficit = target - d_hi;
                let at_a = (c_hi - (1.0 - 0.5 * h * l0)).abs() <= slack;
                let at_b = (c_hi - (pn + 0.5 * h * ln + 1.0)).abs() <= slack;
                let (t0, t1) = match (at_a, at_b) {
                    (true, true) => (0.5 * deficit, -0.5 * deficit),
                    (true, false) => (deficit, 0.0),
                    _ => (0.0, -deficit),
                };
                (c_hi, t0, t1, 0)
            } else {
                let (c, steps) = bisect(c_lo, c_hi, |c| r.d(c) - target)?;
                (c, 0.0, 0.0, steps)
            };
            let v = assemble(k0 + t0, r.increments(c), Some(k1 + t1));
            (v, r.momenta(c), (t0, t1), steps)
        }
        BoundaryCondition::Neumann { k0, k1 } => {
            let mismatch = (k0 - k1) - e.load_integral();
            if mismatch.abs() > compat_tol {
                return Err(unbounded(format!(
                    "flux data incompatible with the load: k0 - k1 - int L = {mismatch:e}"
                )));
            }
            let r = Reduction::new(e, 0.0);
            let c = k0 - 0.5 * h * l0;
            if !(c > r.lo && c < r.hi) {
                return Err(unbounded(format!("momentum leaves (-1, 1): p ranges over [{}, {}]", c - r.hi + 1.0, c - r.lo - 1.0)));
            }
            let mut v = assemble(0.0, r.increments(c), None);
            let shift = mean(&start) - mean(&v);
            v.iter_mut().for_each(|x| *x += shift);
            (v, r.momenta(c), (0.0, 0.0), 0)
        }
        BoundaryCondition::Robin { l0: lam0, k0, l1: lam1, k1 } => {
            let r = Reduction::new(e, 0.0);
            let pn = r.prefix[n - 1];
            let v_first = |c: f64| (k0 - 0.5 * h * l0 - c) / lam0;
            let resid = |c: f64| (c - pn) + lam1 * (v_first(c) + r.d(c)) - k1 - 0.5 * h * ln;
            // D dominates near both ends of the open interval
            let width = r.hi - r.lo;
            if !(width > 0.0) {
                return Err(unbounded("no admissible momentum: load variation exceeds 2"));
            }
            let mut lo = r.lo;
            let mut hi = r.hi;
            let mut shrink = 1e-3;
            loop {
                let a = r.lo + shrink * width;
                let b = r.hi - shrink * width;
                let (ra, rb) = (resid(a), resid(b));
                if ra.is_finite() && rb.is_finite() && ra.signum() != rb.signum() {
                    lo = a;
                    hi = b;
                    break;
                }
                shrink *= 1e-3;
                if shrink < 1e-300 {
                    break;
                }
            }
            let (c, steps) = bisect(lo, hi, resid)?;
            let v = assemble(v_first(c), r.increments(c), None);
            (v, r.momenta(c), (0.0, 0.0), steps)
        }
        BoundaryCondition::Periodic => {
            let mismatch = e.load_integral();
            if mismatch.abs() > compat_tol {
                return Err(unbounded(format!("load has nonzero trapezoid integral {mismatch:e}")));
            }
            // seam momentum c; cell momenta c - h L_0 / 2 - P_k
            let r = Reduction::new(e, 0.5 * h * l0);
            let lo = r.lo.max(-1.0);
            let hi = r.hi.min(1.0);
            if !(lo < hi) {
                return Err(unbounded("no admissible momentum: load variation exceeds 2"));
            }
            let closure = |c: f64| {
                if c <= lo {
                    f64::NEG_INFINITY
                } else if c >= hi {
                    f64::INFINITY
                } else {
                    h * psi_inv(c).unwrap_or(f64::NAN) + r.d(c)
                }
            };
            let (c, steps) = bisect(lo, hi, closure)?;
            let mut v = assemble(0.0, r.increments(c), None);
            let shift = mean(&start) - mean(&v);
            v.iter_mut().for_each(|x| *x += shift);
            (v, r.momenta(c), (0.0, 0.0), steps)
        }
    };

    if values.iter().any(|x| !x.is_finite()) {
        return Err(unbounded("non-finite minimiser"));
    }
    let sup = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sup > UNBOUNDED_LIMIT {
        return Err(unbounded(format!("minimiser sup-norm {sup:e} exceeds {UNBOUNDED_LIMIT:e}")));
    }
    let energy = e.value(&values);
    let v = GridFunction::new(grid, values).map_err(SolveError::Core)?;
    Ok(Minimizer { v, p, energy_initial, energy, detachment, bisection_steps: steps })
}
