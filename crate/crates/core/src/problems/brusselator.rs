use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::SplitIvp;
use crate::linalg::{BandMatrix, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Constant coefficients.
    Fixed,
    /// `α = ρ = 6e−5 + 5e−5 cos(πt)`, `r = 0.6 + 0.5 cos(4πt)` for every species.
    TimeVarying,
}

/// Ordering of the `3N` unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// All `u`, then all `v`, then all `w`: three tridiagonal implicit blocks.
    SpeciesMajor,
    /// `(u_i, v_i, w_i)` per node: implicit bandwidth 3.
    Interleaved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BrusselatorParams {
    pub n: usize,
    pub variant: Variant,
    pub layout: Layout,
    /// Diffusion `α_u, α_v, α_w` of the fixed variant.
    pub diffusion: [f64; 3],
    /// Advection `ρ_u, ρ_v, ρ_w` of the fixed variant.
    pub advection: [f64; 3],
    /// Reaction rates `r_u, r_v, r_w` of the fixed variant.
    pub reaction: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    /// Initial profiles are `base + 0.1 sin(πx)`.
    pub initial: [f64; 3],
    pub t_end: f64,
}

impl BrusselatorParams {
    pub fn fixed(n: usize) -> Self {
        let (a, b) = (0.6, 2.0);
        BrusselatorParams {
            n,
            variant: Variant::Fixed,
            layout: Layout::SpeciesMajor,
            diffusion: [1e-2; 3],
            advection: [1e-3; 3],
            reaction: [1.0; 3],
            a,
            b,
            eps: 1e-2,
            initial: [a, b / a, b],
            t_end: 3.0,
        }
    }

    pub fn time_varying(n: usize) -> Self {
        BrusselatorParams {
            n,
            variant: Variant::TimeVarying,
            layout: Layout::SpeciesMajor,
            diffusion: [6e-5; 3],
            advection: [6e-5; 3],
            reaction: [0.6; 3],
            a: 1.0,
            b: 3.5,
            eps: 1e-3,
            initial: [1.2, 3.1, 3.0],
            t_end: 3.0,
        }
    }
}

/// Coefficients in effect at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub diffusion: [f64; 3],
    pub advection: [f64; 3],
    pub reaction: [f64; 3],
}

/// Advection-reaction-diffusion brusselator on `[0, 1]` with second-order
/// centred differences. Boundary values are held fixed: every partition is
/// zero in the boundary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Brusselator {
    pub params: BrusselatorParams,
    dx: f64,
}

impl Brusselator {
    pub fn new(params: BrusselatorParams) -> Result<Self> {
        if params.n < 3 {
            return Err(Error::Config(format!("brusselator needs at least 3 grid points, got {}", params.n)));
        }
        let dx = 1.0 / (params.n - 1) as f64;
        Ok(Brusselator { params, dx })
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.params.n).map(|i| i as f64 * self.dx).collect()
    }

    pub fn coefficients(&self, t: f64) -> Coefficients {
        let p = &self.params;
        match p.variant {
            Variant::Fixed => Coefficients { diffusion: p.diffusion, advection: p.advection, reaction: p.reaction },
            Variant::TimeVarying => {
                let d = 6e-5 + 5e-5 * (PI * t).cos();
                let r = 0.6 + 0.5 * (4.0 * PI * t).cos();
                Coefficients { diffusion: [d; 3], advection: [d; 3], reaction: [r; 3] }
            }
        }
    }

    /// Position of species `s` at node `i` in the state vector.
    #[inline]
    pub fn index(&self, s: usize, i: usize) -> usize {
        match self.params.layout {
            Layout::SpeciesMajor => s * self.params.n + i,
            Layout::Interleaved => 3 * i + s,
        }
    }

    /// Unsplit right-hand side written node by node.
    pub fn full_rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.params.n;
        let c = self.coefficients(t);
        let (a, b, eps) = (self.params.a, self.params.b, self.params.eps);
        let dx2 = self.dx * self.dx;
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 1..n - 1 {
            let at = |s: usize, k: usize| y[self.index(s, k)];
            let (u, v, w) = (at(0, i), at(1, i), at(2, i));
            let react = [a - (w + 1.0) * u + u * u * v, w * u - u * u * v, (b - w) / eps - w * u];
            for s in 0..3 {
                let lap = (at(s, i - 1) - 2.0 * at(s, i) + at(s, i + 1)) / dx2;
                let grad = (at(s, i + 1) - at(s, i - 1)) / (2.0 * self.dx);
                out[self.index(s, i)] = c.diffusion[s] * lap + c.advection[s] * grad + c.reaction[s] * react[s];
            }
        }
    }
}

impl SplitIvp for Brusselator {
    fn dim(&self) -> usize {
        3 * self.params.n
    }

    fn t0(&self) -> f64 {
        0.0
    }

    fn y0(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (i, x) in self.grid().into_iter().enumerate() {
            // sin(π) is not exactly zero in floating point
            let bump = if i == 0 || i + 1 == self.params.n { 0.0 } else { 0.1 * (PI * x).sin() };
            for s in 0..3 {
                y[self.index(s, i)] = self.params.initial[s] + bump;
            }
        }
        y
    }

    fn fast(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.params.n;
        let r = self.coefficients(t).reaction;
        let (a, b, eps) = (self.params.a, self.params.b, self.params.eps);
        for s in 0..3 {
            out[self.index(s, 0)] = 0.0;
            out[self.index(s, n - 1)] = 0.0;
        }
        for i in 1..n - 1 {
            let (iu, iv, iw) = (self.index(0, i), self.index(1, i), self.index(2, i));
            let (u, v, w) = (y[iu], y[iv], y[iw]);
            let uuv = u * u * v;
            out[iu] = r[0] * (a - (w + 1.0) * u + uuv);
            out[iv] = r[1] * (w * u - uuv);
            out[iw] = r[2] * ((b - w) / eps - w * u);
        }
    }

    fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.params.n;
        let rho = self.coefficients(t).advection;
        let inv = 1.0 / (2.0 * self.dx);
        for s in 0..3 {
            out[self.index(s, 0)] = 0.0;
            out[self.index(s, n - 1)] = 0.0;
            for i in 1..n - 1 {
                out[self.index(s, i)] = rho[s] * (y[self.index(s, i + 1)] - y[self.index(s, i - 1)]) * inv;
            }
        }
    }

    fn implicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.params.n;
        let alpha = self.coefficients(t).diffusion;
        let inv = 1.0 / (self.dx * self.dx);
        for s in 0..3 {
            out[self.index(s, 0)] = 0.0;
            out[self.index(s, n - 1)] = 0.0;
            for i in 1..n - 1 {
                let lap = y[self.index(s, i - 1)] - 2.0 * y[self.index(s, i)] + y[self.index(s, i + 1)];
                out[self.index(s, i)] = alpha[s] * lap * inv;
            }
        }
    }

    fn implicit_jacobian(&self, t: f64, _y: &[f64]) -> Option<Matrix> {
        let n = self.params.n;
        let alpha = self.coefficients(t).diffusion;
        let inv = 1.0 / (self.dx * self.dx);
        let bw = match self.params.layout {
            Layout::SpeciesMajor => 1,
            Layout::Interleaved => 3,
        };
        let mut m = BandMatrix::zeros(self.dim(), bw, bw);
        for s in 0..3 {
            let d = alpha[s] * inv;
            for i in 1..n - 1 {
                let row = self.index(s, i);
                m.set(row, self.index(s, i - 1), d);
                m.set(row, row, -2.0 * d);
                m.set(row, self.index(s, i + 1), d);
            }
        }
        Some(Matrix::Banded(m))
    }

    fn name(&self) -> String {
        let tag = match self.params.variant {
            Variant::Fixed => "brusselator",
            Variant::TimeVarying => "brusselator-tv",
        };
        format!("{tag}-{}", self.params.n)
    }
}
