//! Problem configurations (TOML).
//!
//! ```toml
//! mode = "solve"            # optional; must match the subcommand when given
//! domain = [0.0, 1.0]
//! n = 1000
//! f = "1 - s"               # or a table: f = { kind = "step", z = 0.5, left = 3.0, right = -3.0 }
//! bc = { kind = "dirichlet", k0 = 0.0, k1 = 0.0 }
//!
//! [params]
//! p_tol = 1e-4
//! ```

use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{OdeRhs, OdeInstance};
use crate::bc::BoundaryCondition;
use crate::criteria::{Bound, ComparisonG, Envelope, EndpointCase, InteriorCase, Side, StateEnvelope};
use crate::error::CoreError;
use crate::field::{CurvatureField, FieldSpec};
use crate::grid::Grid;
use crate::solver::SolveParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Classify,
    CheckCriteria,
    OracleCompare,
    Probe,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Solve => "solve",
            Mode::Classify => "classify",
            Mode::CheckCriteria => "check-criteria",
            Mode::OracleCompare => "oracle-compare",
            Mode::Probe => "probe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config: {0}")]
    Io(String),
}

impl ConfigError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ConfigError::Syntax { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }
}

/// Criterion case tags: endpoint `j`..`jjjj`, interior `h`/`hh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    J,
    Jj,
    Jjj,
    Jjjj,
    H,
    Hh,
}

/// An envelope with its case tag. `point`, `side` and `bound` default to what the case
/// dictates where it dictates anything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionRequest {
    pub case: CaseTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub c: f64,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Bound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

pub enum CaseKind {
    Endpoint(EndpointCase),
    Interior(InteriorCase),
}

impl CriterionRequest {
    pub fn kind(&self) -> CaseKind {
        match self.case {
            CaseTag::J => CaseKind::Endpoint(EndpointCase::J),
            CaseTag::Jj => CaseKind::Endpoint(EndpointCase::Jj),
            CaseTag::Jjj => CaseKind::Endpoint(EndpointCase::Jjj),
            CaseTag::Jjjj => CaseKind::Endpoint(EndpointCase::Jjjj),
            CaseTag::H => CaseKind::Interior(InteriorCase::H),
            CaseTag::Hh => CaseKind::Interior(InteriorCase::Hh),
        }
    }

    /// The envelope with case defaults filled in.
    pub fn envelope(&self, domain: (f64, f64)) -> Result<Envelope, ConfigError> {
        let (a, b) = domain;
        let (point, side, bound) = match self.case {
            CaseTag::J => (Some(a), Some(Side::Right), Some(Bound::UpperMu)),
            CaseTag::Jj => (Some(b), Some(Side::Left), Some(Bound::UpperMu)),
            CaseTag::Jjj => (Some(a), Some(Side::Right), Some(Bound::LowerNu)),
            CaseTag::Jjjj => (Some(b), Some(Side::Left), Some(Bound::LowerNu)),
            CaseTag::H | CaseTag::Hh => {
                let side = self.side.unwrap_or(Side::Left);
                let mu = matches!((self.case, side), (CaseTag::H, Side::Left) | (CaseTag::Hh, Side::Right));
                (None, Some(side), Some(if mu { Bound::UpperMu } else { Bound::LowerNu }))
            }
        };
        let point = self
            .point
            .or(point)
            .ok_or_else(|| ConfigError::Invalid(format!("criterion {:?} needs a point", self.case)))?;
        let mut env = Envelope::new(point, self.side.or(side).unwrap(), self.c, self.alpha, self.beta, self.bound.or(bound).unwrap());
        if let Some(d) = self.delta {
            env.delta = d;
        }
        Ok(env)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    /// `f = Constant(lambda)` with zero Dirichlet data on the domain.
    CircleArc {
        #[serde(default = "default_oracle_tol")]
        tol: f64,
    },
    /// `f = 0` with Dirichlet data: the straight line.
    Affine {
        #[serde(default = "default_oracle_tol")]
        tol: f64,
    },
}

fn default_oracle_tol() -> f64 {
    1e-3
}

impl OracleSpec {
    pub fn tol(&self) -> f64 {
        match *self {
            OracleSpec::CircleArc { tol } | OracleSpec::Affine { tol } => tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Strong positivity of `v'' = g(t, v)` from `initial`.
    Positivity {
        interval: (f64, f64),
        rhs: OdeRhs,
        initial: (f64, f64),
        comparison: ComparisonG,
        eps: f64,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Sign definiteness of the same kind of trajectory under an Osgood bound.
    Osgood {
        interval: (f64, f64),
        rhs: OdeRhs,
        initial: (f64, f64),
        left: StateEnvelope,
        right: StateEnvelope,
        #[serde(default = "default_steps")]
        steps: usize,
    },
}

fn default_steps() -> usize {
    1000
}

impl ProbeSpec {
    /// The ODE instance to integrate. Osgood specs have no comparison function; a zero
    /// one is supplied since only the trajectory is used.
    pub fn instance(&self) -> OdeInstance {
        match self {
            ProbeSpec::Positivity { interval, rhs, initial, comparison, eps, .. } => {
                OdeInstance { interval: *interval, rhs: rhs.clone(), initial: *initial, comparison: *comparison, eps: *eps }
            }
            ProbeSpec::Osgood { interval, rhs, initial, left, .. } => OdeInstance {
                interval: *interval,
                rhs: rhs.clone(),
                initial: *initial,
                comparison: ComparisonG::zero(left.eps),
                eps: left.eps,
            },
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            ProbeSpec::Positivity { steps, .. } | ProbeSpec::Osgood { steps, .. } => *steps,
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub domain: (f64, f64),
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<CurvatureField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BoundaryCondition>,
    #[serde(default)]
    pub params: SolveParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FieldInput {
    Text(String),
    Spec(FieldSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    #[serde(default = "default_domain")]
    domain: (f64, f64),
    #[serde(default = "default_n")]
    n: usize,
    f: Option<toml::Spanned<FieldInput>>,
    bc: Option<BoundaryCondition>,
    #[serde(default)]
    params: SolveParams,
    #[serde(default)]
    criteria: Vec<CriterionRequest>,
    probe: Option<ProbeSpec>,
    oracle: Option<OracleSpec>,
}

fn default_domain() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_n() -> usize {
    200
}

/// 1-based line and column of byte offset `at`.
fn line_col(src: &str, at: usize) -> (usize, usize) {
    let before = &src[..at.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn syntax(src: &str, span: Option<Range<usize>>, message: String) -> ConfigError {
    let (line, column) = span.map_or((1, 1), |r| line_col(src, r.start));
    ConfigError::Syntax { line, column, message }
}

impl ProblemConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }

    /// Parses and validates a TOML configuration.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| syntax(src, e.span(), e.message().to_string()))?;
        let f = match raw.f {
            None => None,
            Some(spanned) => {
                let span = spanned.span();
                let field = match spanned.into_inner() {
                    FieldInput::Text(text) => CurvatureField::parse(&text).map_err(|e| match e {
                        CoreError::Parse { column, message } => {
                            // the expression starts one past the opening quote
                            let (line, start) = line_col(src, span.start);
                            ConfigError::Syntax {
                                line,
                                column: start + column,
                                message: format!("f: parse error at column {column} of \"{text}\": {message}"),
                            }
                        }
                        other => syntax(src, Some(span.clone()), format!("f: {other}")),
                    })?,
                    FieldInput::Spec(spec) => {
                        CurvatureField::try_from(spec).map_err(|e| syntax(src, Some(span.clone()), format!("f: {e}")))?
                    }
                };
                Some(field)
            }
        };
        let cfg = ProblemConfig {
            mode: raw.mode,
            domain: raw.domain,
            n: raw.n,
            f,
            bc: raw.bc,
            params: raw.params,
            criteria: raw.criteria,
            probe: raw.probe,
            oracle: raw.oracle,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        if let Some(bc) = &self.bc {
            bc.validate().map_err(|e| ConfigError::Invalid(format!("bc: {e}")))?;
        }
        self.params.validate().map_err(|e| ConfigError::Invalid(format!("params: {e}")))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.domain.0, self.domain.1, self.n).map_err(|e| ConfigError::Invalid(format!("domain/n: {e}")))
    }

    /// Checks that the config carries what `mode` needs.
    pub fn require(&self, mode: Mode) -> Result<(), ConfigError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(ConfigError::Invalid(format!("config declares mode {m} but was run as {mode}")));
            }
        }
        let missing = |what: &str| Err(ConfigError::Invalid(format!("mode {mode} needs `{what}`")));
        match mode {
            Mode::Solve | Mode::Classify | Mode::OracleCompare => {
                if self.f.is_none() {
                    return missing("f");
                }
                if self.bc.is_none() {
                    return missing("bc");
                }
                if mode == Mode::OracleCompare && self.oracle.is_none() {
                    return missing("oracle");
                }
            }
            Mode::CheckCriteria if self.criteria.is_empty() => return missing("criteria"),
            Mode::Probe if self.probe.is_none() => return missing("probe"),
            _ => {}
        }
        Ok(())
    }
}
