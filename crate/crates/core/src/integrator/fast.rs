use serde::{Deserialize, Serialize};

use super::SplitIvp;
use crate::error::{Error, Result};
use crate::tableau::{ExplicitRk, MriMethod};

/// Weights `1/(atol_i + rtol·|y_i|)` for WRMS error norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorWeights {
    pub rtol: f64,
    /// One entry per component, or a single entry applied to all.
    pub atol: Vec<f64>,
}

impl ErrorWeights {
    pub fn scalar(rtol: f64, atol: f64) -> Self {
        ErrorWeights { rtol, atol: vec![atol] }
    }

    pub fn atol(&self, i: usize) -> f64 {
        if self.atol.len() == 1 {
            self.atol[0]
        } else {
            self.atol[i]
        }
    }

    /// WRMS norm of `e` with the scale `max(|a_i|, |b_i|)`.
    pub fn norm(&self, e: &[f64], a: &[f64], b: &[f64]) -> f64 {
        if e.is_empty() {
            return 0.0;
        }
        let s: f64 = e
            .iter()
            .enumerate()
            .map(|(i, ei)| {
                let w = ei / (self.atol(i) + self.rtol * a[i].abs().max(b[i].abs()));
                w * w
            })
            .sum();
        (s / e.len() as f64).sqrt()
    }
}

/// Polynomial forcing `g(θ) = Σ_k G_k τ^k` with `τ = θ/span`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyForcing {
    pub coeffs: Vec<Vec<f64>>,
    pub span: f64,
}

impl PolyForcing {
    /// Forcing of stage `i` built from the slow tendencies `fsum[j] = fE_j + fI_j`.
    pub fn stage(method: &MriMethod, i: usize, fsum: &[Vec<f64>], h: f64) -> Self {
        let ci = method.c[i];
        let rows: Vec<&[f64]> = (0..i).map(|j| method.poly[i][j].as_slice()).collect();
        PolyForcing { coeffs: combine(&rows, fsum, 1.0 / ci), span: ci * h }
    }

    /// Forcing of the embedded pass over `[0, H]`.
    pub fn embedding(method: &MriMethod, fsum: &[Vec<f64>], h: f64) -> Self {
        let emb = method.emb_poly.as_ref().expect("method has an embedding");
        let rows: Vec<&[f64]> = emb.iter().take(fsum.len()).map(Vec::as_slice).collect();
        PolyForcing { coeffs: combine(&rows, fsum, 1.0), span: h }
    }

    /// Writes `g(θ)` into `out`.
    pub fn eval(&self, theta: f64, out: &mut [f64]) {
        let tau = theta / self.span;
        out.iter_mut().for_each(|o| *o = 0.0);
        for gk in self.coeffs.iter().rev() {
            for (o, g) in out.iter_mut().zip(gk) {
                *o = *o * tau + g;
            }
        }
    }
}

fn combine(rows: &[&[f64]], fsum: &[Vec<f64>], scale: f64) -> Vec<Vec<f64>> {
    let dim = fsum.first().map_or(0, Vec::len);
    let nk = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    (0..nk)
        .map(|k| {
            let mut g = vec![0.0; dim];
            for (row, f) in rows.iter().zip(fsum) {
                let w = row.get(k).copied().unwrap_or(0.0) * scale;
                if w != 0.0 {
                    for (gi, fi) in g.iter_mut().zip(f) {
                        *gi += w * fi;
                    }
                }
            }
            g
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastSolve {
    pub v: Vec<f64>,
    /// Embedded error norm of each substep; empty without weights or embedding.
    pub errs: Vec<f64>,
    pub f_evals: u64,
}

/// Integrates `v' = fF(tn + θ, v) + g(θ)` over `θ ∈ [0, span]` with `n` uniform
/// steps of `inner`, evaluating `g` at every inner stage abscissa.
#[allow(clippy::too_many_arguments)]
pub fn solve_fast_ivp<P: SplitIvp + ?Sized>(
    p: &P,
    inner: &ExplicitRk,
    forcing: impl Fn(f64, &mut [f64]),
    tn: f64,
    span: f64,
    v0: &[f64],
    n: usize,
    weights: Option<&ErrorWeights>,
) -> Result<FastSolve> {
    let n = n.max(1);
    let dim = v0.len();
    let sf = inner.stages();
    let h = span / n as f64;
    let mut v = v0.to_vec();
    let mut k = vec![vec![0.0; dim]; sf];
    let mut stage = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut errs = Vec::new();
    let est = match (weights, inner.d.as_ref()) {
        (Some(w), Some(d)) => Some((w, d)),
        _ => None,
    };
    let mut e = vec![0.0; dim];
    let mut f_evals = 0;
    for step in 0..n {
        let theta = step as f64 * h;
        for st in 0..sf {
            stage.copy_from_slice(&v);
            for (l, a) in inner.a[st].iter().enumerate() {
                if *a != 0.0 {
                    let ha = h * a;
                    for (x, kl) in stage.iter_mut().zip(&k[l]) {
                        *x += ha * kl;
                    }
                }
            }
            let th = theta + inner.c[st] * h;
            p.fast(tn + th, &stage, &mut k[st]);
            f_evals += 1;
            forcing(th, &mut g);
            for (ki, gi) in k[st].iter_mut().zip(&g) {
                *ki += gi;
            }
        }
        let prev = est.map(|_| v.clone());
        for (st, b) in inner.b.iter().enumerate() {
            if *b != 0.0 {
                let hb = h * b;
                for (x, ks) in v.iter_mut().zip(&k[st]) {
                    *x += hb * ks;
                }
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::FastDivergence(tn + theta + h));
        }
        if let (Some((w, d)), Some(prev)) = (est, prev) {
            e.iter_mut().for_each(|x| *x = 0.0);
            for (st, di) in d.iter().enumerate() {
                for (x, ks) in e.iter_mut().zip(&k[st]) {
                    *x += h * di * ks;
                }
            }
            errs.push(w.norm(&e, &prev, &v));
        }
    }
    Ok(FastSolve { v, errs, f_evals })
}
