use rayon::prelude::*;

use super::{finish_rows, ExperimentConfig, ExperimentKind, ExperimentRecord, ExperimentRow, ReferenceSummary, Truth};
use crate::error::{Error, Result};
use crate::integrator::{integrate_fixed, StepConfig, SubstepPolicy};
use crate::problems::Registered;

/// Fixed-step convergence study: one record per method over `H = H0·2^{−k}`.
///
/// Errors are measured against the analytic solution when the problem has
/// one, otherwise against a single self-converged reference shared by all
/// methods.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    run_fixed(cfg, ExperimentKind::Convergence)
}

/// Fixed-step efficiency study; same rows as [`run_convergence`] with the
/// efficiency defaults (`H = 0.1·2^{−k}`, `k = 0..10`, brusselator-201).
pub fn run_efficiency(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    run_fixed(cfg, ExperimentKind::Efficiency)
}

fn run_fixed(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.kind = kind;
    cfg.validate()?;
    let reg = cfg.build_problem()?;
    let truth = Truth::new(&reg, cfg.samples, &cfg.reference)?;
    let mut out = Vec::new();
    for method in cfg.method_names() {
        let rec = fixed_record(&cfg, &reg, &truth, &method)?;
        if let Some(dir) = &cfg.out {
            rec.write(dir)?;
        }
        out.push(rec);
    }
    Ok(out)
}

fn fixed_record(cfg: &ExperimentConfig, reg: &Registered, truth: &Truth, method: &str) -> Result<ExperimentRecord> {
    let (tab, inner) = cfg.load_method(method)?;
    let (h0, lo, hi) = cfg.schedule(method);
    let step_cfg = StepConfig::default();
    let blowup = truth.divergence_threshold();
    let mut rows = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let h = h0 * 2f64.powi(-k);
            let rec = integrate_fixed(
                reg.ivp.as_ref(),
                &tab,
                &inner,
                reg.t_end,
                h,
                SubstepPolicy::Proportional(cfg.m),
                &truth.times,
                &step_cfg,
            )?;
            let err = truth.max_error(&rec.times, &rec.states);
            let failure = match (&rec.failure, err) {
                (Some(f), _) => Some(f.clone()),
                (None, None) => Some("run ended before the last sample".to_string()),
                (None, Some(e)) if !(e <= blowup) => Some(format!("error {e:e} exceeds solution scale {blowup:e}")),
                _ => None,
            };
            Ok(ExperimentRow {
                k: Some(k),
                h: Some(h),
                tol: None,
                max_error: err.filter(|e| e.is_finite()),
                runtime_seconds: rec.runtime_seconds,
                fast_f_evals: rec.stats.fast_f_evals,
                implicit_solves: rec.stats.implicit_solves,
                accepted: rec.accepted,
                rejected: rec.rejected,
                failure,
                in_fit: false,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{method}: {m}")),
            other => other,
        })?;
    let floor = truth.floor();
    let slope = finish_rows(&mut rows, floor, |r| r.h);
    Ok(ExperimentRecord {
        kind: cfg.kind,
        problem: cfg.problem_name().to_string(),
        method: tab.name.clone(),
        inner: inner.name.clone(),
        rows,
        slope,
        floor,
        reference: truth.reference.as_ref().map(ReferenceSummary::from),
        config: cfg.clone(),
    })
}
