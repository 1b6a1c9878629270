use serde::{Deserialize, Serialize};

use crate::integrator::SplitIvp;
use crate::linalg::{Mat, Matrix};

/// Parameters of the Kværnø–Prothero–Robinson test system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KprParams {
    pub lam_f: f64,
    pub lam_s: f64,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_end: f64,
}

impl Default for KprParams {
    fn default() -> Self {
        KprParams {
            lam_f: -10.0,
            lam_s: -1.0,
            eps: 0.1,
            alpha: 1.0,
            beta: 20.0,
            t_end: 2.5 * std::f64::consts::PI,
        }
    }
}

/// Analytic solution `(√(3 + cos βt), √(2 + cos t))`.
pub fn kpr_exact(t: f64, beta: f64) -> [f64; 2] {
    [(3.0 + (beta * t).cos()).sqrt(), (2.0 + t.cos()).sqrt()]
}

/// KPR problem with the fast first component, an implicit stiff coupling in
/// the second component and the explicit slow forcing `−sin t/(2v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kpr {
    pub params: KprParams,
}

impl Kpr {
    pub fn new(params: KprParams) -> Self {
        Kpr { params }
    }

    /// Coupling matrix `Λ` in row-major order.
    pub fn lambda(&self) -> [[f64; 2]; 2] {
        let p = &self.params;
        let d = p.lam_f - p.lam_s;
        [[p.lam_f, (1.0 - p.eps) / p.alpha * d], [-p.alpha * p.eps * d, p.lam_s]]
    }

    /// `g = ((−3 + u² − cos βt)/(2u), (−2 + v² − cos t)/(2v))`, zero on the solution.
    fn g(&self, t: f64, y: &[f64]) -> [f64; 2] {
        let (u, v) = (y[0], y[1]);
        [
            (-3.0 + u * u - (self.params.beta * t).cos()) / (2.0 * u),
            (-2.0 + v * v - t.cos()) / (2.0 * v),
        ]
    }

    /// Unsplit right-hand side.
    pub fn full_rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let l = self.lambda();
        let (u, v) = (y[0], y[1]);
        let beta = self.params.beta;
        let a = (u * u - 3.0 - (beta * t).cos()) / (2.0 * u);
        let b = (v * v - 2.0 - t.cos()) / (2.0 * v);
        out[0] = l[0][0] * a + l[0][1] * b - beta * (beta * t).sin() / (2.0 * u);
        out[1] = l[1][0] * a + l[1][1] * b - t.sin() / (2.0 * v);
    }
}

impl SplitIvp for Kpr {
    fn dim(&self) -> usize {
        2
    }
    fn t0(&self) -> f64 {
        0.0
    }
    fn y0(&self) -> Vec<f64> {
        vec![2.0, 3f64.sqrt()]
    }
    fn fast(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let l = self.lambda();
        let g = self.g(t, y);
        let beta = self.params.beta;
        out[0] = l[0][0] * g[0] + l[0][1] * g[1] - beta * (beta * t).sin() / (2.0 * y[0]);
        out[1] = 0.0;
    }
    fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = -t.sin() / (2.0 * y[1]);
    }
    fn implicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let l = self.lambda();
        let g = self.g(t, y);
        out[0] = 0.0;
        out[1] = l[1][0] * g[0] + l[1][1] * g[1];
    }
    fn implicit_jacobian(&self, t: f64, y: &[f64]) -> Option<Matrix> {
        let l = self.lambda();
        let (u, v) = (y[0], y[1]);
        let dg1 = 0.5 + (3.0 + (self.params.beta * t).cos()) / (2.0 * u * u);
        let dg2 = 0.5 + (2.0 + t.cos()) / (2.0 * v * v);
        Some(Matrix::Dense(Mat::from_rows(vec![vec![0.0, 0.0], vec![l[1][0] * dg1, l[1][1] * dg2]])))
    }
    fn exact(&self, t: f64) -> Option<Vec<f64>> {
        Some(kpr_exact(t, self.params.beta).to_vec())
    }
    fn name(&self) -> String {
        "kpr".into()
    }
}
