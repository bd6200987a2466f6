//! Report records and their JSON / columnar renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundaryReport, OsgoodReport, ProbeReport, ProbeStatus, RegularityReport};
use crate::criteria::CriterionVerdict;
use crate::solver::{TraceRow, WeakFormReport};

use super::config::{CriterionRequest, Mode, ProblemConfig};

pub const SCHEMA: &str = "curvlab-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Pass,
    Fail,
    Inconclusive,
    Contradiction,
    ShapeViolation,
    NonConvergence,
    ConfigError,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass | RunStatus::Inconclusive => 0,
            RunStatus::Fail | RunStatus::Contradiction | RunStatus::ShapeViolation => 2,
            RunStatus::NonConvergence => 3,
            RunStatus::ConfigError => 4,
        }
    }
}

impl From<ProbeStatus> for RunStatus {
    fn from(s: ProbeStatus) -> Self {
        match s {
            ProbeStatus::Pass => RunStatus::Pass,
            ProbeStatus::Fail => RunStatus::Contradiction,
            ProbeStatus::Inconclusive => RunStatus::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

/// Nodal table: `p` is the momentum averaged over the adjacent cells, extrapolated with
/// the half-cell load at the ends; `f` is `f(x, u(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalTable {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub nodes: NodalTable,
    pub cell_momenta: Vec<f64>,
    pub outer_iterations: usize,
    pub sup_change: f64,
    pub detachment: (f64, f64),
    pub trace: Vec<TraceRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_form: Option<WeakFormReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub request: CriterionRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<CriterionVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub oracle: String,
    pub sup_error: f64,
    pub tol: f64,
    pub pass: bool,
    pub solution: SolutionRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum ProbeRecord {
    Positivity { report: ProbeReport },
    Osgood { report: OsgoodReport },
    /// The probe could not decide (band never entered, or the hypothesis fails).
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Solution(SolutionRecord),
    Criteria { entries: Vec<CriterionEntry> },
    Oracle(OracleRecord),
    Probe(ProbeRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: Mode,
    pub source: String,
    pub status: RunStatus,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ReportBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub elapsed_s: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers and strings")
    }

    /// The nodal table, when the result carries one.
    pub fn nodes(&self) -> Option<&NodalTable> {
        match &self.result {
            Some(ReportBody::Solution(s)) => Some(&s.nodes),
            Some(ReportBody::Oracle(o)) => Some(&o.solution.nodes),
            _ => None,
        }
    }
}

/// Plot-ready columns `x u p f`, 17 significant digits.
pub fn columnar(t: &NodalTable) -> String {
    let mut out = String::from("# x u p f\n");
    for i in 0..t.x.len() {
        writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e}", t.x[i], t.u[i], t.p[i], t.f[i]).unwrap();
    }
    out
}
