use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::{SplitIvp, StepConfig, StepStats, Stepper, SubstepPolicy};
use crate::error::{Error, Result};
use crate::tableau::{ButcherTable, MriTableau};

/// Sampled trajectory of one integration run with its cost counters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub problem: String,
    pub method: String,
    pub inner: String,
    pub t0: f64,
    pub t_end: f64,
    /// Slow step for fixed runs, initial step for adaptive runs.
    pub h: f64,
    pub policy: SubstepPolicy,
    pub accepted: usize,
    pub rejected: usize,
    pub stats: StepStats,
    pub failure: Option<String>,
    pub runtime_seconds: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// State recorded at time `t`, if `t` was a sample point.
    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        self.times.iter().position(|&s| s == t).map(|i| self.states[i].as_slice())
    }

    /// CSV with columns `t, y_0, …, y_{d−1}`.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 0..dim {
            out.push_str(&format!(",y_{i}"));
        }
        out.push('\n');
        for (t, y) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:e}"));
            for v in y {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(self.to_csv().as_bytes())?;
        std::fs::File::create(dir.join(format!("{stem}.json")))?.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }
}

/// Relative slack allowed when matching times to whole step counts.
pub(crate) const STEP_COUNT_TOL: f64 = 1e-8;

pub(crate) fn whole_steps(span: f64, h: f64) -> Option<usize> {
    let x = span / h;
    let n = x.round();
    if n >= 0.0 && (x - n).abs() <= STEP_COUNT_TOL * n.max(1.0) {
        Some(n as usize)
    } else {
        None
    }
}

/// Fixed-step integration from `p.t0()` to `t_end` with slow step `h`.
///
/// `t_end − t0` and every sample offset must be whole multiples of `h`. An empty
/// sample list records the initial and final states. A failing step ends the
/// run early with `failure` set and the samples reached so far.
#[allow(clippy::too_many_arguments)]
pub fn integrate_fixed<P: SplitIvp + ?Sized>(
    p: &P,
    tableau: &MriTableau,
    inner: &ButcherTable,
    t_end: f64,
    h: f64,
    policy: SubstepPolicy,
    samples: &[f64],
    cfg: &StepConfig,
) -> Result<RunRecord> {
    let t0 = p.t0();
    if !(h > 0.0) {
        return Err(Error::Config(format!("step size must be positive, got {h}")));
    }
    let n = whole_steps(t_end - t0, h)
        .ok_or_else(|| Error::Config(format!("(tEnd − t0)/H = {} is not a whole number", (t_end - t0) / h)))?;
    let mut sample_list: Vec<(usize, f64)> = if samples.is_empty() {
        let mut v = vec![(0, t0)];
        if n > 0 {
            v.push((n, t_end));
        }
        v
    } else {
        samples
            .iter()
            .map(|&ts| match whole_steps(ts - t0, h) {
                Some(k) if k <= n => Ok((k, ts)),
                _ => Err(Error::Config(format!("sample time {ts} is not a step boundary in [t0, tEnd]"))),
            })
            .collect::<Result<_>>()?
    };
    sample_list.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rec = RunRecord {
        problem: p.name(),
        method: tableau.name.clone(),
        inner: inner.name.clone(),
        t0,
        t_end,
        h,
        policy,
        accepted: 0,
        rejected: 0,
        stats: StepStats::default(),
        failure: None,
        runtime_seconds: 0.0,
        times: Vec::with_capacity(sample_list.len()),
        states: Vec::with_capacity(sample_list.len()),
    };
    let mut stepper = Stepper::new(p, tableau, inner, cfg.clone());
    let mut y = p.y0();
    let mut next = 0;
    let start = Instant::now();
    for k in 0..=n {
        while next < sample_list.len() && sample_list[next].0 == k {
            rec.times.push(sample_list[next].1);
            rec.states.push(y.clone());
            next += 1;
        }
        if k == n {
            break;
        }
        let tn = t0 + k as f64 * h;
        match stepper.step(tn, &y, h, policy) {
            Ok(out) => {
                y = out.y1;
                rec.accepted += 1;
            }
            Err(e) => {
                rec.failure = Some(format!("step {} at t = {tn}: {e}", k + 1));
                break;
            }
        }
    }
    rec.runtime_seconds = start.elapsed().as_secs_f64();
    rec.stats = stepper.stats;
    Ok(rec)
}
