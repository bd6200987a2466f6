//! Boundary-condition families.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// `u(a) = k0`, `u(b) = k1`.
    Dirichlet { k0: f64, k1: f64 },
    /// `psi(u'(a)) = k0`, `psi(u'(b)) = k1`, flux data in `[-1, 1]`.
    Neumann { k0: f64, k1: f64 },
    /// `psi(u'(a)) + l0 u(a) = k0`, `psi(u'(b)) + l1 u(b) = k1`.
    Robin { l0: f64, k0: f64, l1: f64, k1: f64 },
    Periodic,
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<(), CoreError> {
        let finite = |v: f64| v.is_finite();
        match *self {
            BoundaryCondition::Dirichlet { k0, k1 } if !(finite(k0) && finite(k1)) => {
                Err(CoreError::InvalidBoundary("Dirichlet data must be finite".into()))
            }
            BoundaryCondition::Neumann { k0, k1 } if !(k0.abs() <= 1.0 && k1.abs() <= 1.0) => Err(
                CoreError::InvalidBoundary(format!("Neumann flux data must lie in [-1, 1], got ({k0}, {k1})")),
            ),
            BoundaryCondition::Robin { l0, k0, l1, k1 } => {
                if !(finite(l0) && finite(k0) && finite(l1) && finite(k1)) {
                    Err(CoreError::InvalidBoundary("Robin data must be finite".into()))
                } else if l0 == 0.0 || l1 == 0.0 {
                    Err(CoreError::InvalidBoundary("Robin multipliers must be nonzero".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// The problem with `u -> -u`: data negated, multipliers kept.
    pub fn negated(&self) -> BoundaryCondition {
        match *self {
            BoundaryCondition::Dirichlet { k0, k1 } => BoundaryCondition::Dirichlet { k0: -k0, k1: -k1 },
            BoundaryCondition::Neumann { k0, k1 } => BoundaryCondition::Neumann { k0: -k0, k1: -k1 },
            BoundaryCondition::Robin { l0, k0, l1, k1 } => {
                BoundaryCondition::Robin { l0, k0: -k0, l1, k1: -k1 }
            }
            BoundaryCondition::Periodic => BoundaryCondition::Periodic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet { .. } => "dirichlet",
            BoundaryCondition::Neumann { .. } => "neumann",
            BoundaryCondition::Robin { .. } => "robin",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}
