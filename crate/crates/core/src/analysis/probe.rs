//! Strong-maximum-principle and Osgood probes on scalar second-order ODE instances
//! `v'' = g(t, v, v')`.
//!
//! A probe reports what the trajectory does (stays positive, develops a dead core,
//! touches zero tangentially at an end, changes sign) and raises a contradiction
//! only when the matching criterion is guaranteed and its localised hypothesis is
//! verified on the samples.

use serde::{Deserialize, Serialize};

use crate::criteria::{osgood_check, smp_check, ComparisonG, CriterionVerdict, StateEnvelope};
use crate::error::CoreError;
use crate::expr::Expr;

use super::AnalysisError;

/// Right-hand side `g(t, s, xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OdeRhsSpec", into = "OdeRhsSpec")]
pub enum OdeRhs {
    /// `c * max(s, 0)^q`.
    Power { c: f64, q: f64 },
    /// An expression in `x` (read as `t`) and `s`.
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OdeRhsSpec {
    Power { c: f64, q: f64 },
    Expr { expr: String },
}

impl TryFrom<OdeRhsSpec> for OdeRhs {
    type Error = CoreError;

    fn try_from(spec: OdeRhsSpec) -> Result<Self, CoreError> {
        Ok(match spec {
            OdeRhsSpec::Power { c, q } => OdeRhs::Power { c, q },
            OdeRhsSpec::Expr { expr } => OdeRhs::Expr(Expr::parse(&expr)?),
        })
    }
}

impl From<OdeRhs> for OdeRhsSpec {
    fn from(r: OdeRhs) -> Self {
        match r {
            OdeRhs::Power { c, q } => OdeRhsSpec::Power { c, q },
            OdeRhs::Expr(e) => OdeRhsSpec::Expr { expr: e.source().to_string() },
        }
    }
}

impl OdeRhs {
    pub fn eval(&self, t: f64, s: f64, _xi: f64) -> Result<f64, CoreError> {
        match self {
            OdeRhs::Power { c, q } => Ok(c * s.max(0.0).powf(*q)),
            OdeRhs::Expr(e) => e.eval(t, s).ok_or_else(|| CoreError::Domain { what: e.source().to_string(), x: t, s }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeInstance {
    pub interval: (f64, f64),
    pub rhs: OdeRhs,
    /// `v(alpha)`, `v'(alpha)`.
    pub initial: (f64, f64),
    pub comparison: ComparisonG,
    pub eps: f64,
}

/// Samples `(t_i, v_i, v'_i)` of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

impl OdeTrajectory {
    /// Samples closed-form `v`, `v'` at `n + 1` uniform points.
    pub fn sample(interval: (f64, f64), n: usize, v: impl Fn(f64) -> f64, dv: impl Fn(f64) -> f64) -> Self {
        let (a, b) = interval;
        let t: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect();
        Self { v: t.iter().map(|x| v(*x)).collect(), dv: t.iter().map(|x| dv(*x)).collect(), t }
    }

    /// Classical fourth-order Runge-Kutta with `n` uniform steps.
    pub fn integrate(inst: &OdeInstance, n: usize) -> Result<Self, AnalysisError> {
        let (a, b) = inst.interval;
        let h = (b - a) / n as f64;
        let rhs = |t: f64, y: [f64; 2]| -> Result<[f64; 2], AnalysisError> { Ok([y[1], inst.rhs.eval(t, y[0], y[1])?]) };
        let mut y = [inst.initial.0, inst.initial.1];
        let mut out = Self { t: vec![a], v: vec![y[0]], dv: vec![y[1]] };
        for i in 0..n {
            let t = a + i as f64 * h;
            let k1 = rhs(t, y)?;
            let k2 = rhs(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]])?;
            let k3 = rhs(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]])?;
            let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
            for c in 0..2 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            out.t.push(if i + 1 == n { b } else { t + h });
            out.v.push(y[0]);
            out.dv.push(y[1]);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositivityOutcome {
    StronglyPositive,
    DeadCoreFound { location: f64 },
    BoundaryTangency { end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub outcome: PositivityOutcome,
    pub verdict: CriterionVerdict,
    pub localization_entered: bool,
    pub hypothesis_holds: bool,
    pub contradiction: bool,
    pub status: ProbeStatus,
}

/// Integrates `inst` with `steps` RK4 steps and probes the trajectory.
pub fn positivity_probe(inst: &OdeInstance, steps: usize) -> Result<ProbeReport, AnalysisError> {
    let traj = OdeTrajectory::integrate(inst, steps)?;
    positivity_probe_on(inst, &traj)
}

/// Probes a supplied nonnegative, nontrivial trajectory of `inst`.
pub fn positivity_probe_on(inst: &OdeInstance, traj: &OdeTrajectory) -> Result<ProbeReport, AnalysisError> {
    if !(inst.eps > 0.0) {
        return Err(AnalysisError::NotApplicable("eps must be > 0".into()));
    }
    let m = traj.t.len();
    if m < 3 || traj.v.len() != m || traj.dv.len() != m {
        return Err(AnalysisError::NotApplicable("trajectory needs at least 3 matching samples".into()));
    }
    let vmax = traj.v.iter().fold(0.0f64, |a, v| a.max(*v));
    if !(vmax > 0.0) {
        return Err(AnalysisError::TrivialInput("v vanishes identically".into()));
    }
    let zero_tol = 1e-12 * vmax;
    if traj.v.iter().any(|v| *v < -zero_tol) {
        return Err(AnalysisError::NotApplicable("trajectory takes negative values".into()));
    }
    let dmax = traj.dv.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let flat_tol = 1e-9 * dmax + 1e-14;

    let interior_zero = (1..m - 1).find(|&i| traj.v[i] <= zero_tol);
    let outcome = if let Some(i) = interior_zero {
        // the dead core extends over the zero run that starts at (or before) sample i
        let mut j = i;
        while j + 1 < m && traj.v[j + 1] <= zero_tol {
            j += 1;
        }
        PositivityOutcome::DeadCoreFound { location: traj.t[j] }
    } else if traj.v[0] <= zero_tol && traj.dv[0].abs() <= flat_tol {
        PositivityOutcome::BoundaryTangency { end: traj.t[0] }
    } else if traj.v[m - 1] <= zero_tol && traj.dv[m - 1].abs() <= flat_tol {
        PositivityOutcome::BoundaryTangency { end: traj.t[m - 1] }
    } else {
        PositivityOutcome::StronglyPositive
    };

    let verdict = smp_check(&inst.comparison);
    let mut entered = false;
    let mut holds = true;
    for i in 0..m {
        let (t, v, dv) = (traj.t[i], traj.v[i], traj.dv[i]);
        if v > 0.0 && v <= inst.eps && dv.abs() <= inst.eps {
            entered = true;
            let g = inst.rhs.eval(t, v, dv)?;
            let bound = inst.comparison.g_prime(v);
            if g < -1e-12 || g > bound * (1.0 + 1e-9) + 1e-12 {
                holds = false;
            }
        }
    }
    let non_positive = outcome != PositivityOutcome::StronglyPositive;
    if non_positive && verdict.is_guaranteed() && !entered {
        return Err(AnalysisError::LocalizationUnverifiable);
    }
    let contradiction = non_positive && verdict.is_guaranteed() && holds;
    let status = if contradiction { ProbeStatus::Fail } else { ProbeStatus::Pass };
    Ok(ProbeReport { outcome, verdict, localization_entered: entered, hypothesis_holds: holds, contradiction, status })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OsgoodOutcome {
    SignDefinite,
    SignChangeFound { location: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsgoodReport {
    pub outcome: OsgoodOutcome,
    pub verdict: CriterionVerdict,
    pub contradiction: bool,
    pub status: ProbeStatus,
}

/// Checks `|v'| <= H(v)` where `0 < |v| <= eps` (left envelope for `v < 0`, right for
/// `v > 0`) and looks for a zero of `v`.
pub fn osgood_probe(
    left: &StateEnvelope,
    right: &StateEnvelope,
    traj: &OdeTrajectory,
) -> Result<OsgoodReport, AnalysisError> {
    let m = traj.t.len();
    if m < 2 || traj.v.len() != m || traj.dv.len() != m {
        return Err(AnalysisError::NotApplicable("trajectory needs at least 2 matching samples".into()));
    }
    let vmax = traj.v.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(vmax > 0.0) {
        return Err(AnalysisError::TrivialInput("v vanishes identically".into()));
    }
    for i in 0..m {
        let v = traj.v[i];
        let env = if v < 0.0 { left } else { right };
        if v.abs() <= env.eps {
            let (lhs, rhs) = (traj.dv[i].abs(), env.value(v));
            if lhs > rhs * (1.0 + 1e-6) + 1e-12 {
                return Err(AnalysisError::InequalityViolated { t: traj.t[i], lhs, rhs });
            }
        }
    }
    let zero_tol = 1e-14 * vmax;
    let mut outcome = OsgoodOutcome::SignDefinite;
    for i in 0..m {
        if traj.v[i].abs() <= zero_tol {
            outcome = OsgoodOutcome::SignChangeFound { location: traj.t[i] };
            break;
        }
        if i + 1 < m && traj.v[i] * traj.v[i + 1] < 0.0 {
            let (a, b) = (traj.v[i], traj.v[i + 1]);
            let x = traj.t[i] + a / (a - b) * (traj.t[i + 1] - traj.t[i]);
            outcome = OsgoodOutcome::SignChangeFound { location: x };
            break;
        }
    }
    let verdict = osgood_check(left, right);
    let contradiction = verdict.is_guaranteed() && outcome != OsgoodOutcome::SignDefinite;
    let status = if contradiction { ProbeStatus::Fail } else { ProbeStatus::Pass };
    Ok(OsgoodReport { outcome, verdict, contradiction, status })
}
