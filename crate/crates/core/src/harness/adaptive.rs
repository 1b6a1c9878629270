use rayon::prelude::*;

use super::{finish_rows, ExperimentConfig, ExperimentKind, ExperimentRecord, ExperimentRow, ReferenceSummary, Truth};
use crate::adaptivity::{integrate_adaptive, AdaptiveConfig, AdaptiveRun, ControllerState};
use crate::error::Result;
use crate::theory::method_order;

/// Adaptive tolerance sweep: one record per method, one row per tolerance.
///
/// The slope is fitted against `log(tol)`. With an output directory each run's
/// samples and per-step log are written next to the record.
pub fn run_adaptive(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cfg = cfg.clone();
    cfg.kind = ExperimentKind::Adaptive;
    cfg.validate()?;
    let reg = cfg.build_problem()?;
    let truth = Truth::new(&reg, cfg.samples, &cfg.reference)?;
    let blowup = truth.divergence_threshold();
    let mut out = Vec::new();
    for method in cfg.method_names() {
        let (tab, inner) = cfg.load_method(&method)?;
        let p = method_order(&tab, inner.order).max(1);
        let mut st = ControllerState::new(p, inner.order);
        if let Some(k1) = cfg.controller_k1 {
            st.k1 = k1;
        }
        if let Some(k2) = cfg.controller_k2 {
            st.k2 = k2;
        }
        let runs: Vec<(f64, AdaptiveRun)> = cfg
            .tolerances()
            .into_par_iter()
            .map(|tol| {
                let mut ac = AdaptiveConfig::new(tol);
                ac.m0 = cfg.m;
                ac.h0 = cfg.h0;
                integrate_adaptive(reg.ivp.as_ref(), &tab, &inner, reg.t_end, &st, &ac, &truth.times).map(|r| (tol, r))
            })
            .collect::<Result<_>>()?;
        let mut rows: Vec<ExperimentRow> = runs
            .iter()
            .map(|(tol, run)| {
                let rec = &run.record;
                let err = truth.max_error(&rec.times, &rec.states);
                let failure = match (&rec.failure, err) {
                    (Some(f), _) => Some(f.clone()),
                    (None, None) => Some("run ended before the last sample".to_string()),
                    (None, Some(e)) if !(e <= blowup) => Some(format!("error {e:e} exceeds solution scale {blowup:e}")),
                    _ => None,
                };
                ExperimentRow {
                    k: None,
                    h: None,
                    tol: Some(*tol),
                    max_error: err.filter(|e| e.is_finite()),
                    runtime_seconds: rec.runtime_seconds,
                    fast_f_evals: rec.stats.fast_f_evals,
                    implicit_solves: rec.stats.implicit_solves,
                    accepted: rec.accepted,
                    rejected: rec.rejected,
                    failure,
                    in_fit: false,
                }
            })
            .collect();
        let floor = truth.floor();
        let slope = finish_rows(&mut rows, floor, |r| r.tol);
        let rec = ExperimentRecord {
            kind: ExperimentKind::Adaptive,
            problem: cfg.problem_name().to_string(),
            method: tab.name.clone(),
            inner: inner.name.clone(),
            rows,
            slope,
            floor,
            reference: truth.reference.as_ref().map(ReferenceSummary::from),
            config: cfg.clone(),
        };
        if let Some(dir) = &cfg.out {
            rec.write(dir)?;
            for (tol, run) in &runs {
                run.write(dir, &format!("{}_tol{tol:e}", rec.stem()))?;
            }
        }
        out.push(rec);
    }
    Ok(out)
}
