//! The discrete energy and its first-order stationarity residuals.

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::grid::{Grid, GridFunction};
use crate::psi::psi;

/// `E(v) = sum sqrt(h^2 + (v_{i+1} - v_i)^2) + B(v) - h sum w_i L_i v_i` with a
/// frozen load `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnergy {
    pub grid: Grid,
    pub load: Vec<f64>,
    pub bc: BoundaryCondition,
}

impl DiscreteEnergy {
    pub fn new(grid: Grid, load: Vec<f64>, bc: BoundaryCondition) -> Self {
        Self { grid, load, bc }
    }

    /// `h sum w_i L_i`, the trapezoid integral of the load.
    pub fn load_integral(&self) -> f64 {
        let h = self.grid.h();
        self.load.iter().enumerate().map(|(i, l)| h * self.grid.trapezoid_weight(i) * l).sum()
    }

    pub fn area(&self, v: &[f64]) -> f64 {
        let h = self.grid.h();
        v.windows(2).map(|w| h.hypot(w[1] - w[0])).sum()
    }

    /// Boundary term. Robin uses `k0 v0 - l0 v0^2 / 2 - k1 vn + l1 vn^2 / 2`, the
    /// sign pattern whose stationarity gives `p(a) + l0 u(a) = k0` and
    /// `p(b) + l1 u(b) = k1`.
    pub fn boundary(&self, v: &[f64]) -> f64 {
        let (v0, vn) = (v[0], v[v.len() - 1]);
        match self.bc {
            BoundaryCondition::Dirichlet { k0, k1 } => (v0 - k0).abs() + (vn - k1).abs(),
            BoundaryCondition::Neumann { k0, k1 } => k0 * v0 - k1 * vn,
            BoundaryCondition::Robin { l0, k0, l1, k1 } => {
                k0 * v0 - 0.5 * l0 * v0 * v0 - k1 * vn + 0.5 * l1 * vn * vn
            }
            BoundaryCondition::Periodic => {
                let h = self.grid.h();
                h.hypot(v0 - vn) - h
            }
        }
    }

    pub fn work(&self, v: &[f64]) -> f64 {
        let h = self.grid.h();
        v.iter().zip(&self.load).enumerate().map(|(i, (vi, l))| h * self.grid.trapezoid_weight(i) * l * vi).sum()
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        self.area(v) + self.boundary(v) - self.work(v)
    }

    pub fn value_of(&self, u: &GridFunction) -> f64 {
        self.value(&u.rendered())
    }

    /// Nodal stationarity residuals of `v`.
    pub fn stationarity(&self, v: &[f64]) -> Stationarity {
        let h = self.grid.h();
        let n = self.grid.n();
        let p: Vec<f64> = v.windows(2).map(|w| psi((w[1] - w[0]) / h)).collect();
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // rounding of the nodal values alone perturbs psi(dv / h) by up to eps |v| / h
        let floor = 8.0 * f64::EPSILON * (1.0 + vmax) / h;
        let interior = (1..n)
            .map(|i| {
                let r = p[i - 1] - p[i] - h * self.load[i];
                r.abs() / (1.0 + self.load[i].abs())
            })
            .fold(0.0f64, f64::max);
        let (l0, ln) = (self.load[0], self.load[n]);
        let (pa, pb) = (p[0] + 0.5 * h * l0, p[n - 1] - 0.5 * h * ln);
        let boundary = match self.bc {
            BoundaryCondition::Dirichlet { .. } => {
                // the boundary subgradients must lie in [-1, 1]
                (pa.abs() - 1.0).max(0.0).max((pb.abs() - 1.0).max(0.0))
            }
            BoundaryCondition::Neumann { k0, k1 } => (pa - k0).abs().max((pb - k1).abs()),
            BoundaryCondition::Robin { l0, k0, l1, k1 } => {
                (pa + l0 * v[0] - k0).abs().max((pb + l1 * v[n] - k1).abs())
            }
            BoundaryCondition::Periodic => {
                let ps = psi((v[0] - v[n]) / h);
                (p[0] - ps + 0.5 * h * l0).abs().max((p[n - 1] - ps - 0.5 * h * ln).abs())
            }
        };
        Stationarity { interior, boundary, rounding_floor: floor, trace_a: pa, trace_b: pb }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    /// `max_i |p_{i-1} - p_i - h L_i| / (1 + |L_i|)` over interior nodes.
    pub interior: f64,
    /// Boundary relation residual for the boundary condition.
    pub boundary: f64,
    /// Residual level explained by rounding of the nodal values.
    pub rounding_floor: f64,
    /// Boundary fluxes `p(a)`, `p(b)` with the half-cell load correction.
    pub trace_a: f64,
    pub trace_b: f64,
}

impl Stationarity {
    pub fn within(&self, tol: f64) -> bool {
        self.interior <= tol + self.rounding_floor && self.boundary <= tol + self.rounding_floor
    }
}
