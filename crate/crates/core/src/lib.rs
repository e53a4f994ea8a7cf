//! Small-time local attainability of smooth targets for nonlinear control
//! systems: second-order Hamiltonians, spectral tests, witness controls,
//! switched-trajectory simulation and minimum-time sweeps.

pub mod classify;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod format;
pub mod hamilton;
pub mod mintime;
pub(crate) mod serde_mat;
pub mod spectral;
pub mod system;
pub mod trajsim;

pub use error::{Error, Result};
pub use expr::{Expr, ExprError, Jet2};
pub use system::{
    load_registry, Control, Problem, SystemKind, SystemSpec, TargetSpec,
};
