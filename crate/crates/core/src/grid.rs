//! Uniform grids and discrete bounded-variation functions.
//!
//! A [`GridFunction`] stores the nodal values of the absolutely continuous part of
//! `u` together with an explicit list of jump atoms. Jumps are rendered
//! left-continuously: an atom at node `k` sits inside cell `(x_k, x_{k+1})`, so the
//! rendered value at node `k` excludes it and the value at node `k + 1` includes it.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::psi::psi;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self, CoreError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(CoreError::InvalidGrid(format!("need finite a < b, got ({a}, {b})")));
        }
        if n < 2 {
            return Err(CoreError::InvalidGrid(format!("need n >= 2 cells, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    /// Midpoint of cell `k`.
    pub fn mid(&self, k: usize) -> f64 {
        self.a + (k as f64 + 0.5) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i` (1/2 at the ends, 1 inside).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n {
            0.5
        } else {
            1.0
        }
    }

    /// Index of the cell containing `x` (clamped to the grid).
    pub fn cell_of(&self, x: f64) -> usize {
        let k = ((x - self.a) / self.h()).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.n - 1)
        }
    }

    /// Same interval with twice as many cells.
    pub fn refined(&self) -> Grid {
        Grid { a: self.a, b: self.b, n: 2 * self.n }
    }
}

/// A jump atom of the singular part: `height * delta` inside cell `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub index: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    jumps: Vec<Jump>,
}

impl GridFunction {
    /// A jump-free grid function from nodal values.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, CoreError> {
        Self::with_jumps(grid, values, Vec::new())
    }

    pub fn with_jumps(grid: Grid, values: Vec<f64>, jumps: Vec<Jump>) -> Result<Self, CoreError> {
        if values.len() != grid.n() + 1 {
            return Err(CoreError::InvalidGridFunction(format!(
                "expected {} values, got {}",
                grid.n() + 1,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidGridFunction(format!("value {i} is not finite")));
        }
        let mut prev = 0usize;
        for (j, jump) in jumps.iter().enumerate() {
            if jump.index == 0 || jump.index >= grid.n() {
                return Err(CoreError::InvalidGridFunction(format!(
                    "jump {j} at index {} is not strictly interior",
                    jump.index
                )));
            }
            if j > 0 && jump.index <= prev {
                return Err(CoreError::InvalidGridFunction(
                    "jump indices must be strictly increasing".into(),
                ));
            }
            if !jump.height.is_finite() {
                return Err(CoreError::InvalidGridFunction(format!("jump {j} height is not finite")));
            }
            prev = jump.index;
        }
        Ok(Self { grid, values, jumps })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, CoreError> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.n() + 1], jumps: Vec::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Nodal values of the absolutely continuous part.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn has_jumps(&self) -> bool {
        !self.jumps.is_empty()
    }

    /// Left-continuous rendering of the full function at the nodes.
    pub fn rendered(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut offset = 0.0;
        let mut next = self.jumps.iter().peekable();
        for (i, v) in self.values.iter().enumerate() {
            out.push(v + offset);
            while let Some(j) = next.peek() {
                if j.index == i {
                    offset += j.height;
                    next.next();
                } else {
                    break;
                }
            }
        }
        out
    }

    /// Total increment of the full function over each cell (absolutely continuous
    /// increment plus any atom in the cell).
    pub fn cell_increments(&self) -> Vec<f64> {
        let mut inc: Vec<f64> = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        for j in &self.jumps {
            inc[j.index] += j.height;
        }
        inc
    }

    /// Slopes of the absolutely continuous part, one per cell.
    pub fn ac_slopes(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    pub fn total_variation(&self) -> f64 {
        let ac: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        ac + self.jumps.iter().map(|j| j.height.abs()).sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.rendered().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Momentum of the full function: `psi` of the total cell increment over `h`.
    ///
    /// Cells carrying an atom get the polar density `sign(height)`; elsewhere this is
    /// the discrete flux `psi((u_{k+1} - u_k) / h)`.
    pub fn momentum(&self) -> MomentumField {
        let h = self.grid.h();
        let mut p: Vec<f64> = self.cell_increments().iter().map(|d| psi(d / h)).collect();
        for j in &self.jumps {
            p[j.index] = j.height.signum();
        }
        MomentumField { grid: self.grid, p }
    }

    /// Raw discrete momentum `psi(total increment / h)` without replacing atom cells.
    pub fn discrete_momentum(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.cell_increments().iter().map(|d| psi(d / h)).collect()
    }

    /// Refinement by nodal interpolation of the absolutely continuous part; atoms
    /// keep their position (cell `k` becomes cells `2k`, `2k + 1`; the atom goes to
    /// the left half).
    pub fn refined(&self) -> GridFunction {
        let grid = self.grid.refined();
        let mut values = Vec::with_capacity(grid.n() + 1);
        for w in self.values.windows(2) {
            values.push(w[0]);
            values.push(0.5 * (w[0] + w[1]));
        }
        values.push(*self.values.last().unwrap());
        let jumps = self.jumps.iter().map(|j| Jump { index: 2 * j.index, height: j.height }).collect();
        GridFunction { grid, values, jumps }
    }

    /// Shifts the whole function by a constant.
    pub fn shifted(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v + c).collect(),
            jumps: self.jumps.clone(),
        }
    }
}

/// Cell momenta `p_k`, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumField {
    pub grid: Grid,
    pub p: Vec<f64>,
}

impl MomentumField {
    pub fn max_abs(&self) -> f64 {
        self.p.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
