use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate_fixed, SplitIvp, StepConfig, SubstepPolicy};
use crate::tableau::{load_builtin, load_inner};

/// Settings of the self-convergence reference computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceConfig {
    /// Largest accepted relative change between successive halvings.
    pub gate: f64,
    /// Steps of the coarsest run.
    pub initial_steps: usize,
    pub max_halvings: usize,
    pub m: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig { gate: 1e-12, initial_steps: 40, max_halvings: 14, m: 10 }
    }
}

/// Reference samples with the evidence of convergence.
///
/// The samples are Richardson extrapolations of the two finest runs, so they
/// never coincide with a plain run of the underlying method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reference {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Slow step of the run the samples come from.
    pub h: f64,
    /// Relative change of the extrapolated samples across the last halving, an
    /// estimate of their error.
    pub change: f64,
}

fn rel_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let diff = a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

/// Order of the method the reference is computed with.
const ORDER: i32 = 3;

/// Samples of `p` computed by IMEX-MRI-SR3(2) with repeated step halving and
/// Richardson extrapolation, until two successive halvings each change the
/// extrapolated samples by less than `cfg.gate`.
///
/// Sample offsets from `t0` must be whole multiples of
/// `(t_end − t0)/cfg.initial_steps`.
pub fn reference_solution<P: SplitIvp + ?Sized>(
    p: &P,
    t_end: f64,
    samples: &[f64],
    cfg: &ReferenceConfig,
) -> Result<Reference> {
    let tab = load_builtin("imex-mri-sr32")?;
    let inner = load_inner("bogacki-shampine")?;
    let step_cfg = StepConfig::default();
    let span = t_end - p.t0();
    let factor = 1.0 / (2f64.powi(ORDER) - 1.0);
    let mut raw: Option<Vec<Vec<f64>>> = None;
    let mut extrapolated: Option<(Vec<Vec<f64>>, f64)> = None;
    let mut last_change = f64::INFINITY;
    for k in 0..=cfg.max_halvings {
        let h = span / (cfg.initial_steps << k) as f64;
        let rec = integrate_fixed(p, &tab, &inner, t_end, h, SubstepPolicy::Proportional(cfg.m), samples, &step_cfg)?;
        if rec.failed() {
            raw = None;
            extrapolated = None;
            continue;
        }
        if let Some(coarse) = raw.take() {
            let ext: Vec<Vec<f64>> = rec
                .states
                .iter()
                .zip(&coarse)
                .map(|(f, c)| f.iter().zip(c).map(|(a, b)| a + (a - b) * factor).collect())
                .collect();
            if let Some((prev, prev_change)) = extrapolated.take() {
                let change = rel_change(&prev, &ext);
                last_change = change;
                if change < cfg.gate && prev_change < cfg.gate {
                    return Ok(Reference { times: rec.times, states: ext, h, change });
                }
                extrapolated = Some((ext, change));
            } else {
                extrapolated = Some((ext, f64::INFINITY));
            }
        }
        raw = Some(rec.states);
    }
    Err(Error::ReferenceFailure(format!(
        "gate {:e} unmet after {} halvings (last change {:e})",
        cfg.gate, cfg.max_halvings, last_change
    )))
}
