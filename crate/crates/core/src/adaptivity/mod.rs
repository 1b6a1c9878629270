//! Embedded error estimation at both time scales and the `H`–`M` step controller.
//!
//! The slow step follows `H' = H·safety·ε̂S^{−k1/(p+1)}`. The fast step
//! `h = H/M` follows `h' = h·safety·ε̂F^{−k2/(q+1)}`, so `M' = H'/h'`. Each
//! factor is limited to `[shrink_limit, grow_limit]`.

#[cfg(test)]
mod tests;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{ErrorWeights, NewtonConfig, RunRecord, SplitIvp, StepConfig, StepStats, Stepper, SubstepPolicy};
use crate::tableau::{ButcherTable, MriTableau};

/// WRMS norm of `y1 − yhat` with weights `1/(atol_i + rtol·max(|y1_i|, |yhat_i|))`.
///
/// With `rtol` and `atol` set to the slow tolerances, 1.0 means exactly at
/// tolerance. Non-finite input yields `+∞`.
pub fn estimate_slow_error(y1: &[f64], yhat: &[f64], atol: &[f64], rtol: f64) -> f64 {
    let diff: Vec<f64> = y1.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let w = ErrorWeights { rtol, atol: atol.to_vec() };
    let e = w.norm(&diff, y1, yhat);
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

/// LASA-mean: arithmetic mean of the normalized per-substep inner errors of
/// every fast solve in a slow step. `None` when no substep produced an estimate.
pub fn accumulate_fast_error(errs: &[f64]) -> Option<f64> {
    if errs.is_empty() {
        return None;
    }
    let m = errs.iter().sum::<f64>() / errs.len() as f64;
    Some(if m.is_finite() { m } else { f64::INFINITY })
}

/// Normalized error estimates of one slow step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorEstimate {
    pub slow: f64,
    pub fast: f64,
    /// False when the inner method gave no estimate; `fast` is then 0.
    pub fast_available: bool,
}

/// Constant-Constant controller parameters and bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ControllerState {
    pub k1: f64,
    pub k2: f64,
    pub safety: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub m_min: usize,
    pub m_max: usize,
    pub grow_limit: f64,
    pub shrink_limit: f64,
    pub slow_order: usize,
    pub fast_order: usize,
}

impl ControllerState {
    pub fn new(slow_order: usize, fast_order: usize) -> Self {
        ControllerState {
            k1: 0.42,
            k2: 0.44,
            safety: 0.9,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            m_min: 1,
            m_max: 1_000_000,
            grow_limit: 5.0,
            shrink_limit: 0.1,
            slow_order,
            fast_order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.safety > 0.0
            && self.safety <= 1.0
            && self.k1 > 0.0
            && self.k2 > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_max
            && self.m_min >= 1
            && self.m_min <= self.m_max
            && self.shrink_limit > 0.0
            && self.shrink_limit <= 1.0
            && self.grow_limit >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid controller settings: {self:?}")))
        }
    }

    fn factor(&self, eps: f64, k: f64, order: usize) -> f64 {
        let raw = self.safety * eps.powf(-k / (order as f64 + 1.0));
        if raw.is_nan() {
            return self.shrink_limit;
        }
        raw.clamp(self.shrink_limit, self.grow_limit)
    }
}

/// Outcome of [`controller_update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accept: bool,
    pub h_next: f64,
    pub m_next: usize,
}

/// Accepts when both estimates are at most 1 and proposes the next `H` and `M`.
///
/// Rejected steps get the same formulas as their retry step. A proposal below
/// `h_min` is an error after a rejection and is raised to `h_min` after an
/// acceptance.
pub fn controller_update(st: &ControllerState, est: &ErrorEstimate, h: f64, m: usize) -> Result<Decision> {
    let accept = est.slow <= 1.0 && est.fast <= 1.0;
    let fs = st.factor(est.slow, st.k1, st.slow_order);
    let ff = if est.fast_available { st.factor(est.fast, st.k2, st.fast_order) } else { fs };
    let mut h_next = (h * fs).min(st.h_max);
    if h_next < st.h_min {
        if !accept {
            return Err(Error::StepSizeTooSmall(h_next));
        }
        h_next = st.h_min;
    }
    // Round up so the fast step never exceeds `h·ff`; rounding to nearest can
    // leave M unchanged after a fast rejection and repeat the same step forever.
    let m_real = m as f64 * fs / ff;
    let m_next = ((m_real * (1.0 - 1e-12)).ceil().max(st.m_min as f64).min(st.m_max as f64)) as usize;
    Ok(Decision { accept, h_next, m_next })
}

/// Settings of an adaptive run besides the controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdaptiveConfig {
    /// Overall tolerance; slow and fast parts each get half.
    pub tol: f64,
    /// Absolute tolerance as a multiple of the split tolerance.
    pub atol_factor: f64,
    /// Initial slow step; `None` picks `1e-3·(tEnd − t0)`.
    pub h0: Option<f64>,
    pub m0: usize,
    pub max_steps: usize,
    /// Accept/reject alternations tolerated before giving up.
    pub oscillation_cap: usize,
    pub newton: NewtonConfig,
}

impl AdaptiveConfig {
    pub fn new(tol: f64) -> Self {
        AdaptiveConfig {
            tol,
            atol_factor: 1e-2,
            h0: None,
            m0: 10,
            max_steps: 1_000_000,
            oscillation_cap: 50,
            newton: NewtonConfig::default(),
        }
    }

    /// `TOL^S = TOL^F = tol/2`.
    pub fn split_tol(&self) -> f64 {
        0.5 * self.tol
    }
}

/// One attempted slow step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepLogEntry {
    pub t: f64,
    pub h: f64,
    pub m: usize,
    pub eps_s: f64,
    pub eps_f: f64,
    pub accepted: bool,
}

/// Result of [`integrate_adaptive`]: the run record plus the per-attempt log.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub record: RunRecord,
    pub log: Vec<StepLogEntry>,
    pub config: AdaptiveConfig,
    pub controller: ControllerState,
}

impl AdaptiveRun {
    /// CSV with columns `t, H, M, epsS, epsF, accepted`.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("t,H,M,epsS,epsF,accepted\n");
        for e in &self.log {
            out.push_str(&format!("{:e},{:e},{},{:e},{:e},{}\n", e.t, e.h, e.m, e.eps_s, e.eps_f, u8::from(e.accepted)));
        }
        out
    }

    /// Writes `<stem>.csv` (samples), `<stem>_steps.csv` and the `<stem>.json` sidecar.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(self.record.to_csv().as_bytes())?;
        std::fs::File::create(dir.join(format!("{stem}_steps.csv")))?.write_all(self.log_csv().as_bytes())?;
        let json = serde_json::json!({
            "record": self.record,
            "config": self.config,
            "controller": self.controller,
        });
        std::fs::File::create(dir.join(format!("{stem}.json")))?
            .write_all(serde_json::to_string_pretty(&json)?.as_bytes())?;
        Ok(())
    }
}

/// Adaptive integration from `p.t0()` to `t_end`.
///
/// Steps are shortened to land exactly on every sample time and on `t_end`.
/// An empty sample list records the initial and final states. Controller or
/// oscillation failures end the run early with `record.failure` set.
#[allow(clippy::too_many_arguments)]
pub fn integrate_adaptive<P: SplitIvp + ?Sized>(
    p: &P,
    tableau: &MriTableau,
    inner: &ButcherTable,
    t_end: f64,
    st: &ControllerState,
    cfg: &AdaptiveConfig,
    samples: &[f64],
) -> Result<AdaptiveRun> {
    st.validate()?;
    if !tableau.has_embedding() {
        return Err(Error::Config(format!("method `{}` has no embedding", tableau.name)));
    }
    if inner.b_hat.is_none() {
        return Err(Error::Config(format!("inner method `{}` has no embedding", inner.name)));
    }
    if !(cfg.tol > 0.0) || cfg.m0 == 0 {
        return Err(Error::Config("tolerance must be positive and m0 at least 1".into()));
    }
    let t0 = p.t0();
    if !(t_end > t0) {
        return Err(Error::Config(format!("tEnd = {t_end} must exceed t0 = {t0}")));
    }
    let mut targets: Vec<f64> = samples.to_vec();
    if targets.iter().any(|&s| !(s >= t0 && s <= t_end)) {
        return Err(Error::Config("sample times must lie in [t0, tEnd]".into()));
    }
    if targets.is_empty() {
        targets = vec![t0, t_end];
    }
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let tol = cfg.split_tol();
    let atol = vec![cfg.atol_factor * tol];
    let step_cfg = StepConfig { newton: cfg.newton.clone(), fast_weights: Some(ErrorWeights { rtol: tol, atol: atol.clone() }) };
    let mut stepper = Stepper::new(p, tableau, inner, step_cfg);
    let mut h = cfg.h0.unwrap_or(1e-3 * (t_end - t0)).clamp(st.h_min, st.h_max);
    let mut m = cfg.m0.clamp(st.m_min, st.m_max);

    let mut rec = RunRecord {
        problem: p.name(),
        method: tableau.name.clone(),
        inner: inner.name.clone(),
        t0,
        t_end,
        h,
        policy: SubstepPolicy::Proportional(m),
        accepted: 0,
        rejected: 0,
        stats: StepStats::default(),
        failure: None,
        runtime_seconds: 0.0,
        times: Vec::with_capacity(targets.len()),
        states: Vec::with_capacity(targets.len()),
    };
    let mut log = Vec::new();
    let mut y = p.y0();
    let mut t = t0;
    let mut next = 0;
    let mut alternations = 0usize;
    let mut last_accepted = true;
    let start = Instant::now();

    let outcome: Result<()> = (|| {
        loop {
            while next < targets.len() && targets[next] == t {
                rec.times.push(t);
                rec.states.push(y.clone());
                next += 1;
            }
            if t >= t_end || next >= targets.len() {
                return Ok(());
            }
            if rec.accepted + rec.rejected >= cfg.max_steps {
                return Err(Error::Config(format!("step limit {} reached at t = {t}", cfg.max_steps)));
            }
            let target = targets[next];
            // Stretch by up to 5% rather than leave a sliver before the target.
            let lands = t + 1.05 * h >= target;
            let h_try = if lands { target - t } else { h };
            let result = stepper.step(t, &y, h_try, SubstepPolicy::Proportional(m));
            let (est, out) = match result {
                Ok(out) => {
                    let yhat = out.yhat.as_deref().expect("embedded tableau");
                    let slow = estimate_slow_error(&out.y1, yhat, &atol, tol);
                    let fast = accumulate_fast_error(&out.fast_errs);
                    (ErrorEstimate { slow, fast: fast.unwrap_or(0.0), fast_available: fast.is_some() }, Some(out))
                }
                Err(_) => (ErrorEstimate { slow: f64::INFINITY, fast: f64::INFINITY, fast_available: true }, None),
            };
            let d = controller_update(st, &est, h_try, m)?;
            let accepted = d.accept && out.is_some();
            log.push(StepLogEntry { t, h: h_try, m, eps_s: est.slow, eps_f: est.fast, accepted });
            if accepted {
                y = out.expect("checked").y1;
                t = if lands { target } else { t + h_try };
                rec.accepted += 1;
                if last_accepted {
                    alternations = 0;
                }
            } else {
                rec.rejected += 1;
                if last_accepted && rec.accepted > 0 {
                    alternations += 1;
                    if alternations >= cfg.oscillation_cap {
                        return Err(Error::Oscillation(t));
                    }
                }
            }
            last_accepted = accepted;
            h = d.h_next;
            m = d.m_next;
        }
    })();
    if let Err(e) = outcome {
        rec.failure = Some(e.to_string());
    }
    rec.runtime_seconds = start.elapsed().as_secs_f64();
    rec.stats = stepper.stats;
    Ok(AdaptiveRun { record: rec, log, config: cfg.clone(), controller: *st })
}
