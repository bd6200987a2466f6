//! Boundary attainment and flux relations of a computed solution.

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::field::CurvatureField;
use crate::grid::GridFunction;

use super::{endpoint_momenta, nodal_load, AnalysisError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndReport {
    pub value: f64,
    /// Momentum extrapolated to the endpoint.
    pub momentum: f64,
    /// `|p| >= 1 - p_tol`.
    pub saturated: bool,
    /// Dirichlet only: whether the trace equals the datum.
    pub attained: Option<bool>,
    /// Neumann/Robin: residual of the flux relation.
    pub flux_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub kind: String,
    pub a: EndReport,
    pub b: EndReport,
    /// Periodic only: `|u(a) - u(b)|`.
    pub value_gap: Option<f64>,
    /// Periodic only: `|p(a) - p(b)|`.
    pub momentum_gap: Option<f64>,
    /// Every end either attains its datum / satisfies its flux relation, or (Dirichlet)
    /// detaches with a saturated momentum of the matching sign.
    pub consistent: bool,
}

fn attained(v: f64, k: f64) -> bool {
    (v - k).abs() <= 1e-9 * (1.0 + k.abs())
}

/// Boundary behaviour of `u` under `bc`. The load `f` enters through the half-cell
/// extrapolation of the momentum to the endpoints.
pub fn boundary_attainment(
    u: &GridFunction,
    f: &CurvatureField,
    bc: &BoundaryCondition,
    p_tol: f64,
) -> Result<BoundaryReport, AnalysisError> {
    let g = nodal_load(u, f)?;
    let (pa, pb) = endpoint_momenta(u, &g);
    let r = u.rendered();
    let (ua, ub) = (r[0], r[r.len() - 1]);
    let sat = |p: f64| p.abs() >= 1.0 - p_tol;
    let end = |value: f64, momentum: f64| EndReport {
        value,
        momentum,
        saturated: sat(momentum),
        attained: None,
        flux_residual: None,
    };
    let (mut a, mut b) = (end(ua, pa), end(ub, pb));
    let (mut value_gap, mut momentum_gap) = (None, None);
    let flux_tol = 1e-8;
    let consistent = match *bc {
        BoundaryCondition::Dirichlet { k0, k1 } => {
            a.attained = Some(attained(ua, k0));
            b.attained = Some(attained(ub, k1));
            // a detached trace needs sgn(u(a) - k0) = p(a) and sgn(u(b) - k1) = -p(b)
            let ok_a = attained(ua, k0) || (sat(pa) && (ua - k0).signum() == pa.signum());
            let ok_b = attained(ub, k1) || (sat(pb) && (ub - k1).signum() == -pb.signum());
            ok_a && ok_b
        }
        BoundaryCondition::Neumann { k0, k1 } => {
            a.flux_residual = Some((pa - k0).abs());
            b.flux_residual = Some((pb - k1).abs());
            (pa - k0).abs() <= flux_tol && (pb - k1).abs() <= flux_tol
        }
        BoundaryCondition::Robin { l0, k0, l1, k1 } => {
            let (ra, rb) = ((pa + l0 * ua - k0).abs(), (pb + l1 * ub - k1).abs());
            a.flux_residual = Some(ra);
            b.flux_residual = Some(rb);
            ra <= flux_tol && rb <= flux_tol
        }
        BoundaryCondition::Periodic => {
            value_gap = Some((ua - ub).abs());
            momentum_gap = Some((pa - pb).abs());
            (pa - pb).abs() <= flux_tol
        }
    };
    Ok(BoundaryReport { kind: bc.name().to_string(), a, b, value_gap, momentum_gap, consistent })
}
