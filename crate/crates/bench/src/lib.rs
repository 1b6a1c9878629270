//! Shared fixtures for the criterion benches.

use mrisr::integrator::SplitIvp;
use mrisr::problems::{build_problem, Registered};
use mrisr::tableau::{default_inner, load_builtin, load_inner};
use mrisr::{ButcherTable, MriTableau};

/// A builtin method with its default inner method.
pub fn method(name: &str) -> (MriTableau, ButcherTable) {
    let t = load_builtin(name).expect("builtin method");
    let inner = load_inner(default_inner(name).expect("default inner")).expect("inner method");
    (t, inner)
}

pub fn problem(name: &str) -> Registered {
    build_problem(name, &[]).expect("registered problem")
}

/// Initial state of a registered problem.
pub fn initial_state(p: &Registered) -> Vec<f64> {
    p.ivp.y0()
}

/// The object-safe problem behind a registration.
pub fn ivp(p: &Registered) -> &dyn SplitIvp {
    p.ivp.as_ref()
}
