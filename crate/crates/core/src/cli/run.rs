//! Dispatch of one configuration to the solver, criteria or analysis, and batch runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::{
    boundary_attainment, classify_solution, endpoint_momenta, osgood_probe, oracle, positivity_probe,
    AnalysisError, OdeTrajectory,
};
use crate::bc::BoundaryCondition;
use crate::criteria::{endpoint_regularity, interior_regularity};
use crate::field::CurvatureField;
use crate::sign::load_values;
use crate::solver::{solve, verify_weak_form, SolveError};

use super::config::{CaseKind, ConfigError, Mode, OracleSpec, ProbeSpec, ProblemConfig};
use super::report::{
    CriterionEntry, ErrorRecord, NodalTable, OracleRecord, ProbeRecord, Report, ReportBody, RunStatus,
    SolutionRecord, SCHEMA,
};

/// Residual tolerance of the weak-form check attached to solution records.
const WEAK_TOL: f64 = 1e-6;

struct Failure {
    status: RunStatus,
    error: ErrorRecord,
    /// Partial result to keep in the report (e.g. the solution behind a shape violation).
    result: Option<ReportBody>,
}

impl Failure {
    fn new(status: RunStatus, kind: &str, message: String) -> Self {
        Self { status, error: ErrorRecord { kind: kind.into(), message, line: None, column: None }, result: None }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let (line, column) = e.position().map_or((None, None), |(l, c)| (Some(l), Some(c)));
        let message = match &e {
            ConfigError::Syntax { message, .. } => message.clone(),
            other => other.to_string(),
        };
        Failure { status: RunStatus::ConfigError, error: ErrorRecord { kind: "config".into(), message, line, column }, result: None }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let (status, kind) = match &e {
            SolveError::MaxIterations { .. } | SolveError::OuterNoConvergence { .. } => {
                (RunStatus::NonConvergence, "nonconvergence")
            }
            SolveError::UnboundedBelow { .. } => (RunStatus::NonConvergence, "unbounded_below"),
            SolveError::RangeExceeded { .. } => (RunStatus::NonConvergence, "range_exceeded"),
            SolveError::InvalidParams(_) => (RunStatus::ConfigError, "config"),
            SolveError::Core(_) => (RunStatus::ConfigError, "core"),
        };
        Failure::new(status, kind, e.to_string())
    }
}

fn analysis_kind(e: &AnalysisError) -> &'static str {
    match e {
        AnalysisError::ShapeViolation { .. } => "shape_violation",
        AnalysisError::JumpDirection { .. } => "jump_direction",
        AnalysisError::NotApplicable(_) => "not_applicable",
        AnalysisError::LocalizationUnverifiable => "localization_unverifiable",
        AnalysisError::InequalityViolated { .. } => "inequality_violated",
        AnalysisError::TrivialInput(_) => "trivial_input",
        AnalysisError::Core(_) => "core",
        AnalysisError::Solve(_) => "solve",
    }
}

fn solution_record(cfg: &ProblemConfig, f: &CurvatureField, bc: &BoundaryCondition) -> Result<SolutionRecord, Failure> {
    let grid = cfg.grid()?;
    let sol = solve(f, bc, grid, &cfg.params)?;
    let u = &sol.u;
    let g = load_values(f, u).map_err(|e| Failure::new(RunStatus::ConfigError, "core", e.to_string()))?;
    let n = grid.n();
    let (pa, pb) = endpoint_momenta(u, &g);
    let p: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => pa,
            i if i == n => pb,
            i => 0.5 * (sol.p[i - 1] + sol.p[i]),
        })
        .collect();
    let nodes = NodalTable { x: grid.nodes(), u: u.values().to_vec(), p, f: g };
    let p_tol = cfg.params.p_tol;
    let (regularity, regularity_error) = match classify_solution(u, f, p_tol) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e)),
    };
    let mut record = SolutionRecord {
        nodes,
        cell_momenta: sol.p.clone(),
        outer_iterations: sol.outer_iterations,
        sup_change: sol.sup_change,
        detachment: sol.detachment,
        trace: sol.trace.clone(),
        regularity,
        regularity_error: regularity_error.as_ref().map(|e| e.to_string()),
        boundary: boundary_attainment(u, f, bc, p_tol).ok(),
        weak_form: verify_weak_form(u, f, bc, WEAK_TOL, p_tol).ok(),
    };
    if let Some(e) = regularity_error {
        if matches!(e, AnalysisError::ShapeViolation { .. } | AnalysisError::JumpDirection { .. }) {
            let mut fail = Failure::new(RunStatus::ShapeViolation, analysis_kind(&e), e.to_string());
            record.regularity_error = Some(e.to_string());
            fail.result = Some(ReportBody::Solution(record));
            return Err(fail);
        }
    }
    Ok(record)
}

fn oracle_record(cfg: &ProblemConfig, f: &CurvatureField, bc: &BoundaryCondition, spec: OracleSpec) -> Result<(OracleRecord, RunStatus), Failure> {
    let exact: Box<dyn Fn(f64) -> f64> = match (spec, f, *bc) {
        (OracleSpec::CircleArc { .. }, CurvatureField::Constant(lam), BoundaryCondition::Dirichlet { k0, k1 })
            if k0 == 0.0 && k1 == 0.0 && cfg.domain == (0.0, 1.0) && *lam > 0.0 && *lam <= 2.0 =>
        {
            let lam = *lam;
            Box::new(move |x| oracle::circle_arc(lam, x))
        }
        (OracleSpec::Affine { .. }, CurvatureField::Constant(c), BoundaryCondition::Dirichlet { k0, k1 }) if *c == 0.0 => {
            let (a, b) = cfg.domain;
            Box::new(move |x| k0 + (k1 - k0) * (x - a) / (b - a))
        }
        (OracleSpec::CircleArc { .. }, ..) => {
            return Err(ConfigError::Invalid(
                "circle_arc oracle needs f = constant in (0, 2], Dirichlet(0, 0) and domain [0, 1]".into(),
            )
            .into())
        }
        (OracleSpec::Affine { .. }, ..) => {
            return Err(ConfigError::Invalid("affine oracle needs f = 0 and Dirichlet data".into()).into())
        }
    };
    let solution = solution_record(cfg, f, bc)?;
    let sup_error = solution.nodes.x.iter().zip(&solution.nodes.u).fold(0.0f64, |m, (x, u)| m.max((u - exact(*x)).abs()));
    let pass = sup_error <= spec.tol();
    let name = match spec {
        OracleSpec::CircleArc { .. } => "circle_arc",
        OracleSpec::Affine { .. } => "affine",
    };
    let status = if pass { RunStatus::Pass } else { RunStatus::Fail };
    Ok((OracleRecord { oracle: name.into(), sup_error, tol: spec.tol(), pass, solution }, status))
}

fn probe_record(spec: &ProbeSpec) -> Result<(ProbeRecord, RunStatus), Failure> {
    let inst = spec.instance();
    let inconclusive = |e: AnalysisError| -> Result<(ProbeRecord, RunStatus), Failure> {
        match e {
            AnalysisError::LocalizationUnverifiable
            | AnalysisError::InequalityViolated { .. }
            | AnalysisError::NotApplicable(_) => {
                Ok((ProbeRecord::Inconclusive { reason: e.to_string() }, RunStatus::Inconclusive))
            }
            other => Err(Failure::new(RunStatus::ConfigError, analysis_kind(&other), other.to_string())),
        }
    };
    match spec {
        ProbeSpec::Positivity { .. } => match positivity_probe(&inst, spec.steps()) {
            Ok(report) => {
                let status = report.status.into();
                Ok((ProbeRecord::Positivity { report }, status))
            }
            Err(e) => inconclusive(e),
        },
        ProbeSpec::Osgood { left, right, .. } => {
            let traj = match OdeTrajectory::integrate(&inst, spec.steps()) {
                Ok(t) => t,
                Err(e) => return inconclusive(e),
            };
            match osgood_probe(left, right, &traj) {
                Ok(report) => {
                    let status = report.status.into();
                    Ok((ProbeRecord::Osgood { report }, status))
                }
                Err(e) => inconclusive(e),
            }
        }
    }
}

fn dispatch(cfg: &ProblemConfig, mode: Mode) -> Result<(ReportBody, RunStatus), Failure> {
    cfg.require(mode)?;
    match mode {
        Mode::Solve | Mode::Classify => {
            let (f, bc) = (cfg.f.as_ref().unwrap(), cfg.bc.as_ref().unwrap());
            let record = solution_record(cfg, f, bc)?;
            if mode == Mode::Classify {
                if let Some(e) = &record.regularity_error {
                    let mut fail = Failure::new(RunStatus::Inconclusive, "not_applicable", e.clone());
                    fail.result = Some(ReportBody::Solution(record));
                    return Err(fail);
                }
            }
            Ok((ReportBody::Solution(record), RunStatus::Pass))
        }
        Mode::OracleCompare => {
            let (f, bc) = (cfg.f.as_ref().unwrap(), cfg.bc.as_ref().unwrap());
            let (record, status) = oracle_record(cfg, f, bc, cfg.oracle.unwrap())?;
            Ok((ReportBody::Oracle(record), status))
        }
        Mode::CheckCriteria => {
            let mut status = RunStatus::Pass;
            let entries = cfg
                .criteria
                .iter()
                .map(|req| {
                    let verdict = req.envelope(cfg.domain).map_err(|e| e.to_string()).and_then(|env| {
                        match req.kind() {
                            CaseKind::Endpoint(c) => endpoint_regularity(c, &env, cfg.domain),
                            CaseKind::Interior(c) => interior_regularity(c, &env, cfg.domain),
                        }
                        .map_err(|e| e.to_string())
                    });
                    match verdict {
                        Ok(v) => CriterionEntry { request: *req, verdict: Some(v), error: None },
                        Err(e) => {
                            status = RunStatus::ConfigError;
                            CriterionEntry { request: *req, verdict: None, error: Some(e) }
                        }
                    }
                })
                .collect();
            Ok((ReportBody::Criteria { entries }, status))
        }
        Mode::Probe => {
            let (record, status) = probe_record(cfg.probe.as_ref().unwrap())?;
            Ok((ReportBody::Probe(record), status))
        }
    }
}

/// Runs one parsed configuration.
pub fn run(cfg: &ProblemConfig, mode: Mode, source: &str) -> Report {
    let start = Instant::now();
    let (status, result, error) = match dispatch(cfg, mode) {
        Ok((body, status)) => (status, Some(body), None),
        Err(f) => (f.status, f.result, Some(f.error)),
    };
    Report {
        schema: SCHEMA.into(),
        mode,
        source: source.into(),
        status,
        exit_code: status.exit_code(),
        config: Some(cfg.clone()),
        result,
        error,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

/// Reads, parses and runs the configuration at `path`.
pub fn run_path(path: &Path, mode: Mode) -> Report {
    let source = path.display().to_string();
    match ProblemConfig::from_path(path) {
        Ok(cfg) => run(&cfg, mode, &source),
        Err(e) => {
            let f = Failure::from(e);
            Report {
                schema: SCHEMA.into(),
                mode,
                source,
                status: f.status,
                exit_code: f.status.exit_code(),
                config: None,
                result: None,
                error: Some(f.error),
                elapsed_s: 0.0,
            }
        }
    }
}

/// Runs every config on a pool of `jobs` workers; reports come back in input order.
pub fn run_batch(paths: &[PathBuf], mode: Mode, jobs: usize) -> Vec<Report> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(|| paths.par_iter().map(|p| run_path(p, mode)).collect())
}

/// Largest exit code over a batch (0 for an empty batch).
pub fn batch_exit_code(reports: &[Report]) -> i32 {
    reports.iter().map(|r| r.exit_code).max().unwrap_or(0)
}
