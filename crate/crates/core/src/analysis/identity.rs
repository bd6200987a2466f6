//! The integrability identity for `u''` when `f(., u)` changes sign at most once:
//! `int |u''| = |u'(z) - u'(a)| + |u'(b) - u'(z)|`, with `z` the point where the
//! slope is extremal.

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::psi::psi;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `sum |s_{k+1} - s_k|` plus the half-cell pieces to the extrapolated end slopes.
    pub left: f64,
    /// `|s(z) - s(a)| + |s(b) - s(z)|` from the end slopes and the extremal nodal slope.
    pub right: f64,
    pub gap: f64,
    pub z: f64,
}

/// Both sides of the identity, computed independently from the cell slopes.
///
/// Needs a jump-free `u` with finite endpoint slopes (`|psi| < 1 - p_tol` at both
/// ends) whose slope sequence turns at most once beyond rounding noise.
pub fn u2_integrability(u: &GridFunction, p_tol: f64) -> Result<IdentityReport, AnalysisError> {
    if u.has_jumps() {
        return Err(AnalysisError::NotApplicable("u has jump atoms".into()));
    }
    let grid = *u.grid();
    let n = grid.n();
    if n < 3 {
        return Err(AnalysisError::NotApplicable("need at least 3 cells".into()));
    }
    let s = u.ac_slopes();
    let sa = 1.5 * s[0] - 0.5 * s[1];
    let sb = 1.5 * s[n - 1] - 0.5 * s[n - 2];
    for (end, v) in [("a", sa), ("b", sb)] {
        if !(psi(v).abs() < 1.0 - p_tol) {
            return Err(AnalysisError::NotApplicable(format!("slope at {end} is not finite ({v:e})")));
        }
    }
    let ds: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let noise = 1e-8 * ds.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 1e-13;
    let mut turns = 0;
    let mut last = 0.0f64;
    for d in &ds {
        if d.abs() <= noise {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            turns += 1;
        }
        last = d.signum();
    }
    if turns > 1 {
        return Err(AnalysisError::NotApplicable(format!("slope turns {turns} times; identity needs at most one")));
    }

    let left = ds.iter().map(|d| d.abs()).sum::<f64>() + (s[0] - sa).abs() + (sb - s[n - 1]).abs();
    // right side from nodal slopes: the mean of the linear extrapolations from the
    // cells on either side, second order even where u'' jumps at the turning point
    let nodal: Vec<f64> = (1..n)
        .map(|i| {
            let left = if i >= 2 { 1.5 * s[i - 1] - 0.5 * s[i - 2] } else { s[i - 1] };
            let right = if i + 1 < n { 1.5 * s[i] - 0.5 * s[i + 1] } else { s[i] };
            0.5 * (left + right)
        })
        .collect();
    let around = |v: f64| (v - sa).abs() + (sb - v).abs();
    let (i, right) = nodal.iter().enumerate().fold((0, around(sa)), |(bi, bv), (i, v)| {
        if around(*v) > bv {
            (i + 1, around(*v))
        } else {
            (bi, bv)
        }
    });
    Ok(IdentityReport { left, right, gap: (left - right).abs(), z: grid.x(i) })
}
