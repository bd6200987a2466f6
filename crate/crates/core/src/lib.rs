//! Numerical laboratory for bounded-variation solutions of the one-dimensional
//! prescribed curvature equation
//!
//! ```text
//!     -( u' / sqrt(1 + u'^2) )' = f(x, u),    a < x < b
//! ```
//!
//! under Dirichlet, Neumann, Robin and periodic boundary conditions.
//!
//! The crate is organised bottom-up:
//!
//! * [`psi`], [`grid`], [`expr`], [`field`], [`bc`], [`sign`]: shared domain types
//!   (grids, BV grid functions with explicit jump atoms, the momentum map, curvature
//!   fields, boundary conditions, sign profiles).
//! * [`criteria`]: decidable divergence criteria over power-log envelopes.
//! * [`solver`]: discrete energy minimisation, the outer load iteration, a momentum
//!   integrator and the weak-form verifier.
//! * [`analysis`]: regularity classification, maximum-principle probes, boundary
//!   attainment and the second-derivative integrability identity.
//! * [`cli`]: configuration parsing, batch dispatch and report emission.

pub mod analysis;
pub mod bc;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid;
pub mod psi;
pub mod sign;
pub mod solver;

pub use bc::BoundaryCondition;
pub use error::CoreError;
pub use field::CurvatureField;
pub use grid::{Grid, GridFunction, Jump, MomentumField};
pub use psi::{psi, psi_inv};
pub use sign::{sign_profile, Sign, SignProfile};
