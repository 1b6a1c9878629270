//! IMEX multirate stage-restart (IMEX-MRI-SR) time integration.
//!
//! The crate splits into exact-rational method tables ([`tableau`]), order
//! theory ([`theory`]), the time stepper ([`integrator`]), linear stability
//! ([`stability`]), step control ([`adaptivity`]), benchmark problems
//! ([`problems`]) and experiment drivers ([`harness`]).

pub mod adaptivity;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod linalg;
pub mod problems;
pub mod rational;
pub mod stability;
pub mod tableau;
pub mod theory;

pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentKind, ExperimentRecord, ExperimentRow};
pub use rational::Rational;
pub use tableau::{load_builtin, load_inner, ButcherTable, MriMethod, MriTableau};
