use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Factorization, Matrix};

/// Newton settings. Convergence is declared when the WRMS norm of the residual,
/// weighted by `1/(atol + rtol·|x|)`, is at most one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
    /// Reuse the first factorization for every iteration.
    pub modified: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { rtol: 1e-12, atol: 1e-14, max_iter: 10, modified: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NewtonStats {
    pub iters: usize,
    pub residual_evals: usize,
    pub jacobian_evals: usize,
    pub factorizations: usize,
    pub linear_solves: usize,
}

pub fn wrms(v: &[f64], x: &[f64], rtol: f64, atol: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v
        .iter()
        .zip(x)
        .map(|(vi, xi)| {
            let w = vi / (atol + rtol * xi.abs());
            w * w
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

/// Solves `residual(x) = 0` from `guess`.
///
/// `residual` writes into its output buffer; `jacobian` returns `∂residual/∂x`.
/// Divergence (residual growing tenfold or turning non-finite) and exhausting
/// `max_iter` are errors.
pub fn newton_solve(
    mut residual: impl FnMut(&[f64], &mut [f64]),
    mut jacobian: impl FnMut(&[f64]) -> Result<Matrix>,
    guess: &[f64],
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonStats)> {
    let n = guess.len();
    let mut x = guess.to_vec();
    let mut r = vec![0.0; n];
    let mut st = NewtonStats::default();
    residual(&x, &mut r);
    st.residual_evals += 1;
    let mut norm = wrms(&r, &x, cfg.rtol, cfg.atol);
    if !norm.is_finite() {
        return Err(Error::NewtonFailure("non-finite residual at the initial guess".into()));
    }
    if norm <= 1.0 {
        return Ok((x, st));
    }
    let mut fact: Option<Factorization> = None;
    for _ in 0..cfg.max_iter {
        if fact.is_none() || !cfg.modified {
            let j = jacobian(&x)?;
            st.jacobian_evals += 1;
            fact = Some(j.factor()?);
            st.factorizations += 1;
        }
        let f = fact.as_ref().expect("factored");
        f.solve_in_place(&mut r);
        st.linear_solves += 1;
        for (xi, di) in x.iter_mut().zip(&r) {
            *xi -= di;
        }
        st.iters += 1;
        residual(&x, &mut r);
        st.residual_evals += 1;
        let next = wrms(&r, &x, cfg.rtol, cfg.atol);
        if !next.is_finite() {
            return Err(Error::NewtonFailure(format!("non-finite residual after {} iterations", st.iters)));
        }
        if next <= 1.0 {
            return Ok((x, st));
        }
        if next > 10.0 * norm {
            return Err(Error::NewtonFailure(format!(
                "diverging: residual norm grew from {norm:.3e} to {next:.3e}"
            )));
        }
        norm = next;
    }
    Err(Error::NewtonFailure(format!(
        "no convergence in {} iterations (residual norm {norm:.3e})",
        cfg.max_iter
    )))
}

/// Forward-difference dense Jacobian of `f` at `y`.
pub fn fd_jacobian(mut f: impl FnMut(&[f64], &mut [f64]), y: &[f64]) -> crate::linalg::Mat<f64> {
    let n = y.len();
    let mut f0 = vec![0.0; n];
    f(y, &mut f0);
    let mut f1 = vec![0.0; n];
    let mut yp = y.to_vec();
    let mut jac = crate::linalg::Mat::zeros(n, n);
    let sq = f64::EPSILON.sqrt();
    for j in 0..n {
        let d = sq * y[j].abs().max(1.0);
        yp[j] = y[j] + d;
        f(&yp, &mut f1);
        for i in 0..n {
            jac[(i, j)] = (f1[i] - f0[i]) / d;
        }
        yp[j] = y[j];
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn scalar(v: f64) -> Matrix {
        Matrix::Dense(Mat::from_rows(vec![vec![v]]))
    }

    #[test]
    fn affine_residual_converges_in_one_iteration() {
        let a = [3.5, -2.0];
        let (x, st) = newton_solve(
            |x, r| {
                r[0] = x[0] - a[0];
                r[1] = x[1] - a[1];
            },
            |_| Ok(Matrix::Dense(Mat::identity(2))),
            &[0.0, 0.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert_eq!(x, a.to_vec());
        assert_eq!(st.iters, 1);
    }

    #[test]
    fn square_root_converges_quadratically() {
        let cfg = NewtonConfig { rtol: 1e-14, atol: 1e-14, max_iter: 20, modified: false };
        let mut errs = Vec::new();
        let (x, _) = newton_solve(
            |x, r| {
                errs.push((x[0] - 2.0).abs());
                r[0] = x[0] * x[0] - 4.0;
            },
            |x| Ok(scalar(2.0 * x[0])),
            &[3.0],
            &cfg,
        )
        .unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        // hand iteration: 3 -> 13/6 -> 2.00641 -> 2.0000102
        assert!((errs[1] - 1.0 / 6.0).abs() < 1e-12);
        for w in errs.windows(2).skip(1) {
            if w[1] > 1e-15 && w[0] > 1e-8 {
                assert!(w[1] <= w[0] * w[0], "not quadratic: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let err = newton_solve(|x, r| r[0] = x[0] - 1.0, |_| Ok(scalar(0.0)), &[0.0], &NewtonConfig::default());
        assert!(matches!(err, Err(Error::Singular(_))));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = NewtonConfig { max_iter: 1, modified: true, ..NewtonConfig::default() };
        let err = newton_solve(|x, r| r[0] = x[0].powi(3) - 8.0, |x| Ok(scalar(3.0 * x[0] * x[0])), &[5.0], &cfg);
        assert!(matches!(err, Err(Error::NewtonFailure(_))));
    }

    #[test]
    fn finite_difference_jacobian() {
        let j = fd_jacobian(
            |y, f| {
                f[0] = y[0] * y[1];
                f[1] = y[0].sin();
            },
            &[0.5, 2.0],
        );
        assert!((j[(0, 0)] - 2.0).abs() < 1e-6);
        assert!((j[(0, 1)] - 0.5).abs() < 1e-6);
        assert!((j[(1, 0)] - 0.5f64.cos()).abs() < 1e-6);
        assert!(j[(1, 1)].abs() < 1e-12);
    }
}
