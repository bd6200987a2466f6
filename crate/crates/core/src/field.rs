//! Prescribed curvature fields `f(x, s)`.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::expr::{Expr, Vars};

/// The right-hand side `f(x, s)` of the curvature equation. Pure: evaluation
/// caches nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldSpec", into = "FieldSpec")]
pub enum CurvatureField {
    Constant(f64),
    /// `h(x) * k(s)`.
    SeparatedProduct { h: Expr, k: Expr },
    Expr(Expr),
    /// `left` for `x < z`, `right` for `x > z`, their mean at `x = z`.
    Step { z: f64, left: f64, right: f64 },
    /// `amplitude * sgn(z - x) * |x - z|^alpha`.
    PowerSign { z: f64, amplitude: f64, alpha: f64 },
}

/// Textual form of a field, used by configs and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    Product { h: String, k: String },
    Expr { expr: String },
    Step { z: f64, left: f64, right: f64 },
    PowerSign { z: f64, amplitude: f64, alpha: f64 },
}

impl TryFrom<FieldSpec> for CurvatureField {
    type Error = CoreError;

    fn try_from(spec: FieldSpec) -> Result<Self, CoreError> {
        let field = match spec {
            FieldSpec::Constant { value } => CurvatureField::Constant(value),
            FieldSpec::Product { h, k } => CurvatureField::SeparatedProduct {
                h: Expr::parse_with(&h, Vars::XOnly)?,
                k: Expr::parse_with(&k, Vars::SOnly)?,
            },
            FieldSpec::Expr { expr } => CurvatureField::Expr(Expr::parse(&expr)?),
            FieldSpec::Step { z, left, right } => CurvatureField::Step { z, left, right },
            FieldSpec::PowerSign { z, amplitude, alpha } => CurvatureField::PowerSign { z, amplitude, alpha },
        };
        field.validate()?;
        Ok(field)
    }
}

impl From<CurvatureField> for FieldSpec {
    fn from(f: CurvatureField) -> FieldSpec {
        match f {
            CurvatureField::Constant(value) => FieldSpec::Constant { value },
            CurvatureField::SeparatedProduct { h, k } => {
                FieldSpec::Product { h: h.source().to_string(), k: k.source().to_string() }
            }
            CurvatureField::Expr(e) => FieldSpec::Expr { expr: e.source().to_string() },
            CurvatureField::Step { z, left, right } => FieldSpec::Step { z, left, right },
            CurvatureField::PowerSign { z, amplitude, alpha } => FieldSpec::PowerSign { z, amplitude, alpha },
        }
    }
}

impl CurvatureField {
    /// Parses a field expression in `x` and `s`. An expression mentioning neither
    /// variable is folded to [`CurvatureField::Constant`].
    pub fn parse(src: &str) -> Result<Self, CoreError> {
        let e = Expr::parse(src)?;
        if !e.mentions_x() && !e.mentions_s() {
            if let Some(v) = e.eval(0.0, 0.0).filter(|v| v.is_finite()) {
                return Ok(CurvatureField::Constant(v));
            }
        }
        Ok(CurvatureField::Expr(e))
    }

    pub fn product(h: &str, k: &str) -> Result<Self, CoreError> {
        Ok(CurvatureField::SeparatedProduct {
            h: Expr::parse_with(h, Vars::XOnly)?,
            k: Expr::parse_with(k, Vars::SOnly)?,
        })
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CoreError::InvalidField(format!("{name} must be finite")))
            }
        };
        match *self {
            CurvatureField::Constant(v) => finite("value", v),
            CurvatureField::Step { z, left, right } => {
                finite("z", z)?;
                finite("left", left)?;
                finite("right", right)
            }
            CurvatureField::PowerSign { z, amplitude, alpha } => {
                finite("z", z)?;
                finite("amplitude", amplitude)?;
                finite("alpha", alpha)?;
                if alpha < 0.0 {
                    return Err(CoreError::InvalidField("power-sign exponent must be >= 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64, s: f64) -> Result<f64, CoreError> {
        let value = match self {
            CurvatureField::Constant(v) => Some(*v),
            CurvatureField::SeparatedProduct { h, k } => match (h.eval(x, s), k.eval(x, s)) {
                (Some(hv), Some(kv)) => Some(hv * kv).filter(|v| v.is_finite()),
                _ => None,
            },
            CurvatureField::Expr(e) => e.eval(x, s),
            CurvatureField::Step { z, left, right } => Some(if x < *z {
                *left
            } else if x > *z {
                *right
            } else {
                0.5 * (left + right)
            }),
            CurvatureField::PowerSign { z, amplitude, alpha } => {
                let d = x - z;
                if d == 0.0 {
                    Some(0.0)
                } else {
                    Some(-amplitude * d.signum() * d.abs().powf(*alpha))
                }
            }
        };
        value.ok_or_else(|| CoreError::Domain { what: self.describe(), x, s })
    }

    /// Whether `f` depends on the state variable `s`.
    pub fn depends_on_state(&self) -> bool {
        match self {
            CurvatureField::SeparatedProduct { k, .. } => k.mentions_s(),
            CurvatureField::Expr(e) => e.mentions_s(),
            _ => false,
        }
    }

    /// `-f`, used for sign-flipped duality checks.
    pub fn negated(&self) -> CurvatureField {
        match self {
            CurvatureField::Constant(v) => CurvatureField::Constant(-v),
            CurvatureField::Step { z, left, right } => CurvatureField::Step { z: *z, left: -left, right: -right },
            CurvatureField::PowerSign { z, amplitude, alpha } => {
                CurvatureField::PowerSign { z: *z, amplitude: -amplitude, alpha: *alpha }
            }
            CurvatureField::SeparatedProduct { h, k } => {
                let h = Expr::parse_with(&format!("0-({})", h.source()), Vars::XOnly)
                    .expect("negation of a valid expression parses");
                CurvatureField::SeparatedProduct { h, k: k.clone() }
            }
            CurvatureField::Expr(e) => CurvatureField::Expr(
                Expr::parse(&format!("0-({})", e.source())).expect("negation of a valid expression parses"),
            ),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CurvatureField::Constant(v) => format!("constant({v})"),
            CurvatureField::SeparatedProduct { h, k } => format!("({h})*({k})"),
            CurvatureField::Expr(e) => e.source().to_string(),
            CurvatureField::Step { z, left, right } => format!("step(z={z}, {left}, {right})"),
            CurvatureField::PowerSign { z, amplitude, alpha } => {
                format!("power_sign(z={z}, A={amplitude}, alpha={alpha})")
            }
        }
    }
}
