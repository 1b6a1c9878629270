//! Linear stability of IMEX-MRI-SR methods on `y' = (λF + λE + λI) y`.
//!
//! With `zσ = H λσ` and an exactly solved fast problem one step multiplies the
//! solution by `R(zF, zE, zI) = e_sᵀ (I − (zE + zI) η(zF) − zI Γ)⁻¹ φ_0(c zF)`,
//! where `η_{i,j}(zF) = Σ_k ω^{k}_{i,j} φ_{k+1}(c_i zF)`.

mod phi;
mod region;

pub use phi::{phi, phi_all, TAYLOR_RADIUS};
pub use region::{
    scan_component_region, scan_joint_region, sector_samples, Component, RegionScan, ScanKind, SectorSampling,
    SectorSpec, Window, SCAN_TOLERANCE,
};

use num_complex::Complex64;

use crate::linalg::Mat;
use crate::rational;
use crate::tableau::MriTableau;

/// Floating-point coefficients of a tableau, ready for repeated evaluation of `R`.
#[derive(Debug, Clone)]
pub struct StabilityFunction {
    c: Vec<f64>,
    /// `omega[k][i*s + j] = Ω^{k}_{i,j}`
    omega: Vec<Vec<f64>>,
    gamma: Vec<f64>,
}

/// `η(zF)` and `φ_0(c zF)` for one fast eigenvalue.
#[derive(Debug, Clone)]
pub struct FastFactors {
    eta: Vec<Complex64>,
    phi0: Vec<Complex64>,
}

impl StabilityFunction {
    pub fn new(t: &MriTableau) -> Self {
        let s = t.stages();
        let flat = |m: &Mat<rational::Rational>| m.as_slice().iter().map(rational::to_f64).collect::<Vec<_>>();
        debug_assert_eq!(t.gamma.as_slice().len(), s * s);
        StabilityFunction {
            c: t.c.iter().map(rational::to_f64).collect(),
            omega: t.omega.iter().map(flat).collect(),
            gamma: flat(&t.gamma),
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn fast_factors(&self, zf: Complex64) -> FastFactors {
        let s = self.stages();
        let nk = self.omega.len();
        let mut eta = vec![Complex64::new(0.0, 0.0); s * s];
        let mut phis = Vec::with_capacity(nk);
        for i in 0..s {
            phi_all(nk, zf * self.c[i], &mut phis);
            for j in 0..s {
                eta[i * s + j] = (0..nk).map(|k| phis[k] * self.omega[k][i * s + j]).sum();
            }
        }
        let phi0 = self.c.iter().map(|&ci| (zf * ci).exp()).collect();
        FastFactors { eta, phi0 }
    }

    /// `R` for precomputed fast factors. A singular resolvent gives `+∞`.
    pub fn eval_with(&self, f: &FastFactors, ze: Complex64, zi: Complex64) -> Complex64 {
        let s = self.stages();
        let zs = ze + zi;
        let mut a = vec![Complex64::new(0.0, 0.0); s * s];
        for (idx, v) in a.iter_mut().enumerate() {
            *v = -zs * f.eta[idx] - zi * self.gamma[idx];
        }
        for i in 0..s {
            a[i * s + i] += 1.0;
        }
        let mut b = f.phi0.clone();
        if !solve_complex(&mut a, &mut b, s) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        b[s - 1]
    }

    pub fn eval(&self, zf: Complex64, ze: Complex64, zi: Complex64) -> Complex64 {
        self.eval_with(&self.fast_factors(zf), ze, zi)
    }
}

/// `η(zF) = Σ_k diag(φ_{k+1}(c zF)) Ω^{k}`.
pub fn eta_matrix(t: &MriTableau, zf: Complex64) -> Mat<Complex64> {
    let sf = StabilityFunction::new(t);
    let s = sf.stages();
    let f = sf.fast_factors(zf);
    Mat::from_fn(s, s, |i, j| f.eta[i * s + j])
}

/// The stability function `R(zF, zE, zI)`; `+∞` where the resolvent is singular.
pub fn stability_value(t: &MriTableau, zf: Complex64, ze: Complex64, zi: Complex64) -> Complex64 {
    StabilityFunction::new(t).eval(zf, ze, zi)
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` system.
/// Returns `false` on a zero or non-finite pivot.
fn solve_complex(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> bool {
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|r| (r, a[r * n + k].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(pmax > 0.0) || !pmax.is_finite() {
            return false;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let inv = a[k * n + k].inv();
        for r in k + 1..n {
            let l = a[r * n + k] * inv;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let akj = a[k * n + j];
                a[r * n + j] -= l * akj;
            }
            let bk = b[k];
            b[r] -= l * bk;
        }
    }
    for k in (0..n).rev() {
        let mut v = b[k];
        for j in k + 1..n {
            v -= a[k * n + j] * b[j];
        }
        b[k] = v / a[k * n + k];
    }
    true
}
