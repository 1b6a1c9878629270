//! Benchmark problems, the problem registry and self-converged references.

mod brusselator;
mod kpr;
mod linear;
mod reference;

pub use brusselator::{Brusselator, BrusselatorParams, Coefficients, Layout, Variant};
pub use kpr::{kpr_exact, Kpr, KprParams};
pub use linear::LinearScalar;
pub use reference::{reference_solution, Reference, ReferenceConfig};

use crate::error::{Error, Result};
use crate::integrator::SplitIvp;

pub fn problem_names() -> &'static [&'static str] {
    &["kpr", "brusselator-201", "brusselator-801", "brusselator-tv-101"]
}

/// A registered problem with its time interval.
pub struct Registered {
    pub ivp: Box<dyn SplitIvp>,
    pub t_end: f64,
}

impl Registered {
    /// Measurement grid: ten equally spaced points after `t0`.
    pub fn sample_times(&self, count: usize) -> Vec<f64> {
        let t0 = self.ivp.t0();
        (1..=count).map(|j| t0 + (self.t_end - t0) * j as f64 / count as f64).collect()
    }
}

fn apply_kpr(p: &mut KprParams, key: &str, v: f64) -> Result<()> {
    match key {
        "lamF" => p.lam_f = v,
        "lamS" => p.lam_s = v,
        "eps" => p.eps = v,
        "alpha" => p.alpha = v,
        "beta" => p.beta = v,
        "tEnd" => p.t_end = v,
        _ => return Err(Error::Config(format!("unknown kpr parameter '{key}'"))),
    }
    Ok(())
}

fn apply_brusselator(p: &mut BrusselatorParams, key: &str, v: f64) -> Result<()> {
    match key {
        "N" => {
            if v < 3.0 || v.fract() != 0.0 {
                return Err(Error::Config(format!("N must be an integer ≥ 3, got {v}")));
            }
            p.n = v as usize;
        }
        "a" => p.a = v,
        "b" => p.b = v,
        "eps" => p.eps = v,
        "alpha" => p.diffusion = [v; 3],
        "rho" => p.advection = [v; 3],
        "r" => p.reaction = [v; 3],
        "tEnd" => p.t_end = v,
        _ => return Err(Error::Config(format!("unknown brusselator parameter '{key}'"))),
    }
    Ok(())
}

/// Builds a registered problem, applying `key=value` overrides.
pub fn build_problem(name: &str, overrides: &[(String, f64)]) -> Result<Registered> {
    match name {
        "kpr" => {
            let mut p = KprParams::default();
            for (k, v) in overrides {
                apply_kpr(&mut p, k, *v)?;
            }
            Ok(Registered { ivp: Box::new(Kpr::new(p)), t_end: p.t_end })
        }
        "brusselator-201" | "brusselator-801" | "brusselator-tv-101" => {
            let mut p = match name {
                "brusselator-201" => BrusselatorParams::fixed(201),
                "brusselator-801" => BrusselatorParams::fixed(801),
                _ => BrusselatorParams::time_varying(101),
            };
            for (k, v) in overrides {
                apply_brusselator(&mut p, k, *v)?;
            }
            let t_end = p.t_end;
            Ok(Registered { ivp: Box::new(Brusselator::new(p)?), t_end })
        }
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

/// Parses `key=value` override strings.
pub fn parse_overrides(items: &[String]) -> Result<Vec<(String, f64)>> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("override '{s}' has a non-numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}
