//! Regularity classification of computed solutions, maximum-principle and Osgood
//! probes, boundary attainment, the second-derivative identity and analytic oracles.

mod boundary;
mod classify;
mod identity;
pub mod oracle;
mod probe;

use thiserror::Error;

use crate::error::CoreError;
use crate::field::CurvatureField;
use crate::grid::GridFunction;
use crate::psi::psi;
use crate::solver::SolveError;

pub use boundary::{boundary_attainment, BoundaryReport, EndReport};
pub use classify::{
    classify_solution, AttachedVerdict, BlowUp, EndpointStatus, IntervalShape, JumpDirection, JumpRecord,
    RegularityReport, Shape, TaxonomyCase,
};
pub use identity::{u2_integrability, IdentityReport};
pub use probe::{
    osgood_probe, positivity_probe, positivity_probe_on, OdeInstance, OdeRhs, OdeTrajectory, OsgoodOutcome,
    OsgoodReport, PositivityOutcome, ProbeReport, ProbeStatus,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("shape violation on ({lo}, {hi}): second difference {value:e} breaks the {expected} mandate")]
    ShapeViolation { lo: f64, hi: f64, value: f64, expected: String },
    #[error("jump at {x} has direction {found:?}, contradicting the sign pattern")]
    JumpDirection { x: f64, found: JumpDirection },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("localization band never entered; probe inconclusive")]
    LocalizationUnverifiable,
    #[error("hypothesis |v'| <= H(v) fails at t = {t}: |v'| = {lhs}, H(v) = {rhs}")]
    InequalityViolated { t: f64, lhs: f64, rhs: f64 },
    #[error("trivial input: {0}")]
    TrivialInput(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Load `f(x_i, u_i)` at the rendered nodal values.
pub(crate) fn nodal_load(u: &GridFunction, f: &CurvatureField) -> Result<Vec<f64>, CoreError> {
    crate::sign::load_values(f, u)
}

/// Cell momenta `psi(total increment / h)`.
pub(crate) fn cell_momenta(u: &GridFunction) -> Vec<f64> {
    let h = u.grid().h();
    u.cell_increments().iter().map(|d| psi(d / h)).collect()
}

/// Momenta extrapolated to the endpoints with the half-cell load:
/// `p(a) = p_0 + (h/2) g_0`, `p(b) = p_{n-1} - (h/2) g_n`.
pub fn endpoint_momenta(u: &GridFunction, g: &[f64]) -> (f64, f64) {
    let p = cell_momenta(u);
    let h = u.grid().h();
    let n = u.grid().n();
    (p[0] + 0.5 * h * g[0], p[n - 1] - 0.5 * h * g[n])
}
