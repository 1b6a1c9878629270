//! The IMEX-MRI-SR step: stage-restart fast solves with polynomial slow forcing,
//! implicit stage corrections, the embedded pass, and fixed-step runs.

mod fast;
mod newton;
pub(crate) mod run;

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

pub use fast::{solve_fast_ivp, ErrorWeights, FastSolve, PolyForcing};
pub use newton::{fd_jacobian, newton_solve, wrms, NewtonConfig, NewtonStats};
pub use run::{integrate_fixed, RunRecord};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tableau::{ButcherTable, ExplicitRk, MriMethod, MriTableau};

/// Additively split problem `y' = fF(t, y) + fE(t, y) + fI(t, y)`.
///
/// `fF` is integrated by the inner explicit method, `fE` explicitly at the slow
/// scale and `fI` implicitly at the slow scale.
pub trait SplitIvp: Send + Sync {
    fn dim(&self) -> usize;
    fn t0(&self) -> f64;
    fn y0(&self) -> Vec<f64>;
    fn fast(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn implicit(&self, t: f64, y: &[f64], out: &mut [f64]);
    /// `∂fI/∂y`; `None` selects forward finite differences.
    fn implicit_jacobian(&self, _t: f64, _y: &[f64]) -> Option<Matrix> {
        None
    }
    /// Analytic solution, when known.
    fn exact(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }
    fn name(&self) -> String;
}

/// Cost counters of a run. Every field only grows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub fast_f_evals: u64,
    pub slow_e_evals: u64,
    pub slow_i_evals: u64,
    pub implicit_solves: u64,
    pub newton_iters: u64,
    pub linear_solves: u64,
    pub jacobian_evals: u64,
}

impl AddAssign for StepStats {
    fn add_assign(&mut self, o: StepStats) {
        self.fast_f_evals += o.fast_f_evals;
        self.slow_e_evals += o.slow_e_evals;
        self.slow_i_evals += o.slow_i_evals;
        self.implicit_solves += o.implicit_solves;
        self.newton_iters += o.newton_iters;
        self.linear_solves += o.linear_solves;
        self.jacobian_evals += o.jacobian_evals;
    }
}

/// How many inner steps each stage's fast solve takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstepPolicy {
    /// `max(1, ceil(|c_i|·M))` steps over `[0, c_i H]`, so `h ≤ H/M`.
    Proportional(usize),
    /// The same number of steps for every stage.
    Uniform(usize),
}

impl SubstepPolicy {
    pub fn substeps(&self, method: &MriMethod, i: usize) -> usize {
        match *self {
            SubstepPolicy::Proportional(m) => method.ceil_c_times(i, m).max(1),
            SubstepPolicy::Uniform(n) => n.max(1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub newton: NewtonConfig,
    /// Weights for the inner embedded error estimates; `None` skips them.
    pub fast_weights: Option<ErrorWeights>,
}

/// Stage values of the current step.
#[derive(Debug, Clone, Default)]
pub struct StageWorkspace {
    pub y: Vec<Vec<f64>>,
    pub f_e: Vec<Vec<f64>>,
    pub f_i: Vec<Vec<f64>>,
}

impl StageWorkspace {
    pub fn new(stages: usize, dim: usize) -> Self {
        StageWorkspace {
            y: vec![vec![0.0; dim]; stages],
            f_e: vec![vec![0.0; dim]; stages],
            f_i: vec![vec![0.0; dim]; stages],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub y1: Vec<f64>,
    pub yhat: Option<Vec<f64>>,
    /// Per-substep inner error norms over all fast solves of the step.
    pub fast_errs: Vec<f64>,
}

/// Stage forcing `g_i(θ) = (1/c_i) Σ_{j<i} ω_{i,j}(θ/(c_i H)) (fE_j + fI_j)`.
///
/// Stage indices are zero-based; `c_i` must be nonzero.
pub fn forcing_eval(method: &MriMethod, i: usize, ws: &StageWorkspace, theta: f64, h: f64) -> Vec<f64> {
    let ci = method.c[i];
    let tau = theta / (ci * h);
    let dim = ws.y.first().map_or(0, Vec::len);
    let mut g = vec![0.0; dim];
    for j in 0..i {
        let w = method.omega_at(i, j, tau) / ci;
        for (gk, (e, im)) in g.iter_mut().zip(ws.f_e[j].iter().zip(&ws.f_i[j])) {
            *gk += w * (e + im);
        }
    }
    g
}

/// Solves `Y = base + H γ fI(t, Y)` by Newton iteration starting from `guess`.
///
/// Returns `base` unchanged when `γ = 0`. A modified Newton failure is retried
/// once with full Newton.
#[allow(clippy::too_many_arguments)]
pub fn implicit_stage_solve<P: SplitIvp + ?Sized>(
    p: &P,
    base: &[f64],
    gamma: f64,
    t: f64,
    h: f64,
    guess: &[f64],
    cfg: &NewtonConfig,
    stats: &mut StepStats,
) -> Result<Vec<f64>> {
    if gamma == 0.0 {
        return Ok(base.to_vec());
    }
    stats.implicit_solves += 1;
    let hg = h * gamma;
    let attempt = |cfg: &NewtonConfig, stats: &mut StepStats| {
        let mut f_evals = 0u64;
        let out = newton_solve(
            |y, r| {
                p.implicit(t, y, r);
                f_evals += 1;
                for ((ri, yi), bi) in r.iter_mut().zip(y).zip(base) {
                    *ri = yi - bi - hg * *ri;
                }
            },
            |y| {
                let jac = p
                    .implicit_jacobian(t, y)
                    .unwrap_or_else(|| Matrix::Dense(fd_jacobian(|yy, out| p.implicit(t, yy, out), y)));
                Ok(jac.shifted_identity(-hg))
            },
            guess,
            cfg,
        );
        stats.slow_i_evals += f_evals;
        out
    };
    match attempt(cfg, stats) {
        Ok((y, ns)) => {
            tally(stats, &ns);
            Ok(y)
        }
        Err(first) if cfg.modified => {
            let full = NewtonConfig { modified: false, ..*cfg };
            match attempt(&full, stats) {
                Ok((y, ns)) => {
                    tally(stats, &ns);
                    Ok(y)
                }
                Err(_) => Err(first),
            }
        }
        Err(e) => Err(e),
    }
}

fn tally(stats: &mut StepStats, ns: &NewtonStats) {
    stats.newton_iters += ns.iters as u64;
    stats.linear_solves += ns.linear_solves as u64;
    stats.jacobian_evals += ns.jacobian_evals as u64;
}

/// Reusable single-step driver for one problem, method and inner table.
pub struct Stepper<'a, P: SplitIvp + ?Sized> {
    problem: &'a P,
    method: MriMethod,
    inner: ExplicitRk,
    cfg: StepConfig,
    ws: StageWorkspace,
    pub stats: StepStats,
}

impl<'a, P: SplitIvp + ?Sized> Stepper<'a, P> {
    pub fn new(problem: &'a P, tableau: &MriTableau, inner: &ButcherTable, cfg: StepConfig) -> Self {
        let method = MriMethod::new(tableau);
        let ws = StageWorkspace::new(method.stages(), problem.dim());
        Stepper { problem, method, inner: inner.to_f64(), cfg, ws, stats: StepStats::default() }
    }

    pub fn method(&self) -> &MriMethod {
        &self.method
    }

    pub fn inner(&self) -> &ExplicitRk {
        &self.inner
    }

    pub fn workspace(&self) -> &StageWorkspace {
        &self.ws
    }

    /// Advances `yn` from `tn` to `tn + h`.
    pub fn step(&mut self, tn: f64, yn: &[f64], h: f64, policy: SubstepPolicy) -> Result<StepOutput> {
        let p = self.problem;
        let s = self.method.stages();
        let dim = p.dim();
        let weights = self.cfg.fast_weights.clone();
        let weights = weights.as_ref();
        let mut fast_errs = Vec::new();
        let mut fsum: Vec<Vec<f64>> = Vec::with_capacity(s);

        self.ws.y[0].copy_from_slice(yn);
        self.eval_slow(0, tn);
        fsum.push(sum(&self.ws.f_e[0], &self.ws.f_i[0]));

        for i in 1..s {
            let ci = self.method.c[i];
            let ti = tn + ci * h;
            let fail = |e: Error| Error::StepFailure { stage: i + 1, reason: e.to_string() };
            let mut base = if ci == 0.0 {
                yn.to_vec()
            } else {
                let forcing = PolyForcing::stage(&self.method, i, &fsum, h);
                let n = policy.substeps(&self.method, i);
                let out = solve_fast_ivp(p, &self.inner, |th, g| forcing.eval(th, g), tn, ci * h, yn, n, weights).map_err(fail)?;
                self.stats.fast_f_evals += out.f_evals;
                fast_errs.extend(out.errs);
                out.v
            };
            for j in 0..i {
                let g = self.method.gamma[i][j];
                if g != 0.0 {
                    axpy(&mut base, h * g, &self.ws.f_i[j]);
                }
            }
            let gii = self.method.gamma[i][i];
            let y = implicit_stage_solve(p, &base, gii, ti, h, &base, &self.cfg.newton, &mut self.stats)
                .map_err(fail)?;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(fail(Error::FastDivergence(ti)));
            }
            self.ws.y[i] = y;
            if i + 1 < s {
                self.eval_slow(i, ti);
                fsum.push(sum(&self.ws.f_e[i], &self.ws.f_i[i]));
            }
        }
        let y1 = self.ws.y[s - 1].clone();

        let yhat = match (&self.method.emb_poly, &self.method.emb_gamma) {
            (Some(_), Some(eg)) => {
                let fail = |e: Error| Error::StepFailure { stage: s + 1, reason: e.to_string() };
                let forcing = PolyForcing::embedding(&self.method, &fsum, h);
                let n = policy.substeps(&self.method, s - 1);
                let out = solve_fast_ivp(p, &self.inner, |th, g| forcing.eval(th, g), tn, h, yn, n, weights).map_err(fail)?;
                self.stats.fast_f_evals += out.f_evals;
                fast_errs.extend(out.errs);
                let mut base = out.v;
                for (j, g) in eg.iter().enumerate().take(s - 1) {
                    if *g != 0.0 {
                        axpy(&mut base, h * g, &self.ws.f_i[j]);
                    }
                }
                let yh = implicit_stage_solve(p, &base, eg[s - 1], tn + h, h, &y1, &self.cfg.newton, &mut self.stats)
                    .map_err(fail)?;
                Some(yh)
            }
            _ => None,
        };
        debug_assert_eq!(y1.len(), dim);
        Ok(StepOutput { y1, yhat, fast_errs })
    }

    fn eval_slow(&mut self, i: usize, t: f64) {
        let ws = &mut self.ws;
        self.problem.explicit(t, &ws.y[i], &mut ws.f_e[i]);
        self.problem.implicit(t, &ws.y[i], &mut ws.f_i[i]);
        self.stats.slow_e_evals += 1;
        self.stats.slow_i_evals += 1;
    }
}

/// One step from `(tn, yn)` with default settings.
#[allow(clippy::too_many_arguments)]
pub fn step<P: SplitIvp + ?Sized>(
    p: &P,
    tableau: &MriTableau,
    inner: &ButcherTable,
    yn: &[f64],
    tn: f64,
    h: f64,
    policy: SubstepPolicy,
    cfg: &StepConfig,
) -> Result<(StepOutput, StepStats)> {
    let mut st = Stepper::new(p, tableau, inner, cfg.clone());
    let out = st.step(tn, yn, h, policy)?;
    Ok((out, st.stats))
}

fn sum(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
