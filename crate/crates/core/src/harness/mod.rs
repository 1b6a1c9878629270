//! Experiment drivers: order verification, fixed-step convergence and
//! efficiency studies, adaptive tolerance sweeps and stability-region export.
//!
//! Every driver returns structured records; when an output directory is set
//! each record is also written as CSV plus a JSON sidecar echoing the config.
//! Schedule rows run in parallel, so problems must be safe to evaluate from
//! several threads at once (guaranteed by `SplitIvp: Send + Sync`).

mod adaptive;
mod fixed;
mod scan;
#[cfg(test)]
mod tests;
mod verify;

pub use adaptive::run_adaptive;
pub use fixed::{run_convergence, run_efficiency};
pub use scan::{run_stability_export, StabilitySettings};
pub use verify::{run_verify, verification_table, verify_tableau, MethodVerification};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{build_problem, problem_names, Reference, ReferenceConfig, Registered};
use crate::tableau::{builtin_names, default_inner, load_builtin, load_inner, ButcherTable, MriTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Verify,
    Convergence,
    Efficiency,
    Stability,
    Adaptive,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Verify => "verify",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Efficiency => "efficiency",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Adaptive => "adaptive",
        }
    }
}

/// Full description of one experiment. Unset fields take per-kind defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Builtin method names; empty means every builtin the experiment applies to.
    pub methods: Vec<String>,
    /// Inner method per outer method, overriding the default pairing. Keys may
    /// be short (`sr32`) or full (`imex-mri-sr32`) names.
    pub inner: BTreeMap<String, String>,
    /// Tableau files checked by `verify` in addition to `methods`.
    pub tableau_files: Vec<PathBuf>,
    pub problem: Option<String>,
    pub overrides: BTreeMap<String, f64>,
    /// Slow steps are `h0·2^{−k}` for `k = kmin..=kmax`.
    pub h0: Option<f64>,
    pub kmin: Option<i32>,
    pub kmax: Option<i32>,
    /// Fast substep ratio `M` for fixed-step runs and the initial `M` of adaptive runs.
    pub m: usize,
    /// Number of equally spaced measurement times after `t0`.
    pub samples: usize,
    /// Tolerance schedule of adaptive sweeps.
    pub tols: Vec<f64>,
    pub controller_k1: Option<f64>,
    pub controller_k2: Option<f64>,
    pub reference: ReferenceConfig,
    pub stability: StabilitySettings,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Convergence,
            methods: Vec::new(),
            inner: BTreeMap::new(),
            tableau_files: Vec::new(),
            problem: None,
            overrides: BTreeMap::new(),
            h0: None,
            kmin: None,
            kmax: None,
            m: 10,
            samples: 10,
            tols: Vec::new(),
            controller_k1: None,
            controller_k2: None,
            reference: ReferenceConfig::default(),
            stability: StabilitySettings::default(),
            out: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig { kind, ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn problem_name(&self) -> &str {
        match (&self.problem, self.kind) {
            (Some(p), _) => p,
            (None, ExperimentKind::Efficiency) => "brusselator-201",
            (None, ExperimentKind::Adaptive) => "brusselator-tv-101",
            (None, _) => "kpr",
        }
    }

    pub fn method_names(&self) -> Vec<String> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        let all = builtin_names().iter().map(|s| s.to_string());
        match self.kind {
            ExperimentKind::Adaptive => all.filter(|n| load_builtin(n).is_ok_and(|t| t.has_embedding())).collect(),
            _ => all.collect(),
        }
    }

    pub fn tolerances(&self) -> Vec<f64> {
        if self.tols.is_empty() {
            vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
        } else {
            self.tols.clone()
        }
    }

    /// Base step and `k` range for `method`.
    pub fn schedule(&self, method: &str) -> (f64, i32, i32) {
        let merk = method.starts_with("merk");
        let (h0, lo, hi) = match self.kind {
            ExperimentKind::Efficiency => (0.1, 0, 10),
            _ if merk => (std::f64::consts::PI, 2, 9),
            _ => (std::f64::consts::PI, 4, 11),
        };
        (self.h0.unwrap_or(h0), self.kmin.unwrap_or(lo), self.kmax.unwrap_or(hi))
    }

    pub fn inner_name(&self, method: &str) -> Result<String> {
        let t = load_builtin(method)?;
        if let Some(n) = self.inner.get(method).or_else(|| self.inner.get(&t.name)) {
            return Ok(n.clone());
        }
        default_inner(&t.name)
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("no default inner method for `{method}`")))
    }

    pub(crate) fn load_method(&self, method: &str) -> Result<(MriTableau, ButcherTable)> {
        let t = load_builtin(method)?;
        let inner = load_inner(&self.inner_name(method)?)?;
        Ok((t, inner))
    }

    pub(crate) fn build_problem(&self) -> Result<Registered> {
        let overrides: Vec<(String, f64)> = self.overrides.iter().map(|(k, v)| (k.clone(), *v)).collect();
        build_problem(self.problem_name(), &overrides)
    }

    /// Checks the config before any run starts.
    pub fn validate(&self) -> Result<()> {
        for m in self.method_names() {
            self.load_method(&m)?;
            if matches!(self.kind, ExperimentKind::Convergence | ExperimentKind::Efficiency) {
                let (h0, lo, hi) = self.schedule(&m);
                if lo > hi || !(h0 > 0.0) {
                    return Err(Error::Config(format!("empty step schedule for `{m}`: k = {lo}..={hi}, H0 = {h0}")));
                }
            }
        }
        if matches!(self.kind, ExperimentKind::Convergence | ExperimentKind::Efficiency | ExperimentKind::Adaptive) {
            if !problem_names().contains(&self.problem_name()) {
                return Err(Error::UnknownProblem(self.problem_name().to_string()));
            }
            if self.m == 0 || self.samples == 0 {
                return Err(Error::Config("m and samples must be at least 1".into()));
            }
        }
        if self.kind == ExperimentKind::Adaptive && self.tolerances().iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.kind == ExperimentKind::Stability {
            self.stability.validate()?;
        }
        Ok(())
    }
}

/// One schedule entry of a convergence, efficiency or adaptive experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentRow {
    pub k: Option<i32>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    /// Largest absolute error over the sample times and components.
    pub max_error: Option<f64>,
    pub runtime_seconds: f64,
    pub fast_f_evals: u64,
    pub implicit_solves: u64,
    pub accepted: usize,
    pub rejected: usize,
    pub failure: Option<String>,
    /// Whether the row entered the slope fit.
    pub in_fit: bool,
}

impl ExperimentRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Summary of the self-converged reference a record was measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceSummary {
    pub h: f64,
    pub change: f64,
}

impl From<&Reference> for ReferenceSummary {
    fn from(r: &Reference) -> Self {
        ReferenceSummary { h: r.h, change: r.change }
    }
}

/// Result of one method over one schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub problem: String,
    pub method: String,
    pub inner: String,
    pub rows: Vec<ExperimentRow>,
    /// Least-squares slope of `log(maxError)` against `log(H)` (or `log(tol)`).
    pub slope: Option<f64>,
    /// Rows with errors at or below this value are treated as reference noise.
    pub floor: f64,
    pub reference: Option<ReferenceSummary>,
    pub config: ExperimentConfig,
}

impl ExperimentRecord {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(ExperimentRow::failed)
    }

    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.kind.as_str(), self.problem, self.method)
    }

    pub fn to_csv(&self) -> String {
        let adaptive = self.kind == ExperimentKind::Adaptive;
        let mut out = String::from(if adaptive { "tol" } else { "k,H" });
        out.push_str(",maxError,runtimeSeconds,fastFEvals,implicitSolves,accepted,rejected,failed,inFit\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        for r in &self.rows {
            if adaptive {
                out.push_str(&opt(r.tol));
            } else {
                out.push_str(&format!("{},{}", r.k.map_or(String::new(), |k| k.to_string()), opt(r.h)));
            }
            out.push_str(&format!(
                ",{},{:e},{},{},{},{},{},{}\n",
                opt(r.max_error),
                r.runtime_seconds,
                r.fast_f_evals,
                r.implicit_solves,
                r.accepted,
                r.rejected,
                u8::from(r.failed()),
                u8::from(r.in_fit)
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_pair(dir, &self.stem(), &self.to_csv(), &self.to_json()?)
    }
}

pub(crate) fn write_pair(dir: &Path, stem: &str, csv: &str, json: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(csv.as_bytes())?;
    std::fs::File::create(dir.join(format!("{stem}.json")))?.write_all(json.as_bytes())?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points or no spread in `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 || pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Where errors are measured: the analytic solution or a computed reference.
pub(crate) struct Truth {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub reference: Option<Reference>,
}

impl Truth {
    pub fn new(reg: &Registered, samples: usize, cfg: &ReferenceConfig) -> Result<Self> {
        let times = reg.sample_times(samples);
        let exact: Option<Vec<Vec<f64>>> = times.iter().map(|&t| reg.ivp.exact(t)).collect();
        if let Some(states) = exact {
            return Ok(Truth { times, states, reference: None });
        }
        let r = crate::problems::reference_solution(reg.ivp.as_ref(), reg.t_end, &times, cfg)?;
        Ok(Truth { times, states: r.states.clone(), reference: Some(r) })
    }

    /// Reference-noise floor: 100 times the reference's estimated accuracy.
    pub fn floor(&self) -> f64 {
        self.reference.as_ref().map_or(0.0, |r| 100.0 * r.change)
    }

    /// Maximum error over samples; `None` if a sample is missing.
    pub fn max_error(&self, times: &[f64], states: &[Vec<f64>]) -> Option<f64> {
        let mut worst = 0.0f64;
        for (t, want) in self.times.iter().zip(&self.states) {
            let i = times.iter().position(|s| s == t)?;
            for (a, b) in states[i].iter().zip(want) {
                let e = (a - b).abs();
                worst = if e.is_nan() { f64::INFINITY } else { worst.max(e) };
            }
        }
        Some(worst)
    }

    /// Errors above this mean the run blew up even without a reported failure.
    pub fn divergence_threshold(&self) -> f64 {
        self.states.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

/// Marks fit rows and fits the slope of `log(maxError)` against `log(x)`.
pub(crate) fn finish_rows(rows: &mut [ExperimentRow], floor: f64, x: impl Fn(&ExperimentRow) -> Option<f64>) -> Option<f64> {
    let mut pts = Vec::new();
    for r in rows.iter_mut() {
        r.in_fit = false;
        if r.failed() {
            continue;
        }
        if let (Some(e), Some(xv)) = (r.max_error, x(r)) {
            if e > floor && e > 0.0 && e.is_finite() {
                r.in_fit = true;
                pts.push((xv, e));
            }
        }
    }
    fit_slope(&pts)
}
