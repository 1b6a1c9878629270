//! Flattened GARK form of an IMEX-MRI-SR method with a given inner table.

use std::ops::{Add, Mul};

use num_traits::{One, Zero};

use super::{trees::colored_trees, Condition, OrderReport};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{self, rat, Rational};
use crate::tableau::{ButcherTable, MriTableau};

/// GARK tables: fast stages `F` (one inner table per slow stage, `s·s^F` in total)
/// coupled to the slow explicit (`E`) and implicit (`I`) stages.
#[derive(Debug, Clone, PartialEq)]
pub struct GarkTables<T> {
    /// `C^S ⊗ A^F`
    pub aff: Mat<T>,
    /// `Σ_k Ω^{k} ⊗ (A^F c^{F×k})`
    pub afe: Mat<T>,
    /// Equal to `afe`.
    pub afi: Mat<T>,
    /// `C^S ⊗ b^{F,T}`
    pub asf: Mat<T>,
    /// `Ω̄`
    pub ase: Mat<T>,
    /// `Ω̄ + Γ`
    pub asi: Mat<T>,
    pub bf: Vec<T>,
    pub be: Vec<T>,
    pub bi: Vec<T>,
    /// `c^S ⊗ c^F`
    pub cf: Vec<T>,
    pub cs: Vec<T>,
}

fn assemble<T>(
    c: &[T],
    omega: &[Mat<T>],
    gamma: &Mat<T>,
    af: &Mat<T>,
    bf: &[T],
    cfast: &[T],
) -> GarkTables<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let s = c.len();
    let sf = bf.len();
    let cs_diag = Mat::from_fn(s, s, |i, j| if i == j { c[i].clone() } else { T::zero() });
    let aff = cs_diag.kron(af);

    let mut afe: Mat<T> = Mat::zeros(s * sf, s);
    let mut ase: Mat<T> = Mat::zeros(s, s);
    let mut cpow = vec![T::one(); sf];
    for om in omega {
        // A^F c^{F×k} and b^F·c^{F×k}; the latter equals 1/(k+1) for a consistent inner method
        let acol = af.matvec(&cpow);
        let bdot = bf.iter().zip(&cpow).fold(T::zero(), |acc, (b, x)| acc + b * x);
        let block = om.kron(&Mat::from_fn(sf, 1, |l, _| acol[l].clone()));
        for i in 0..s * sf {
            for j in 0..s {
                afe[(i, j)] = afe[(i, j)].clone() + block[(i, j)].clone();
            }
        }
        for i in 0..s {
            for j in 0..s {
                ase[(i, j)] = ase[(i, j)].clone() + &om[(i, j)] * &bdot;
            }
        }
        cpow = cpow.iter().zip(cfast).map(|(p, x)| p * x).collect();
    }
    let asi = Mat::from_fn(s, s, |i, j| ase[(i, j)].clone() + gamma[(i, j)].clone());
    let bt = Mat::from_rows(vec![bf.to_vec()]);
    let asf = cs_diag.kron(&bt);
    let cf = c.iter().flat_map(|ci| cfast.iter().map(move |x| ci * x)).collect();
    GarkTables {
        bf: asf.row(s - 1).to_vec(),
        be: ase.row(s - 1).to_vec(),
        bi: asi.row(s - 1).to_vec(),
        afi: afe.clone(),
        aff,
        afe,
        asf,
        ase,
        asi,
        cf,
        cs: c.to_vec(),
    }
}

fn check_bushy(t: &MriTableau, inner: &ButcherTable) -> Result<()> {
    let mut cpow = vec![rational::one(); inner.stages()];
    for k in 0..t.n_omega() {
        let v = inner.b.iter().zip(&cpow).fold(rational::zero(), |acc, (b, x)| acc + b * x);
        if v != rat(1, k as i64 + 1) {
            return Err(Error::BushyTree { k });
        }
        cpow = cpow.iter().zip(&inner.c).map(|(p, x)| p * x).collect();
    }
    Ok(())
}

/// Exact GARK tables. Requires `b^{F,T} c^{F×k} = 1/(k+1)` for `k < n_Ω`.
pub fn assemble_gark(t: &MriTableau, inner: &ButcherTable) -> Result<GarkTables<Rational>> {
    check_bushy(t, inner)?;
    Ok(assemble(&t.c, &t.omega, &t.gamma, &inner.a, &inner.b, &inner.c))
}

/// Floating-point GARK tables, for large inner tables where exact assembly is wasteful.
pub fn assemble_gark_f64(t: &MriTableau, inner: &ButcherTable) -> Result<GarkTables<f64>> {
    check_bushy(t, inner)?;
    let f = |r: &Rational| rational::to_f64(r);
    let v = |x: &[Rational]| x.iter().map(f).collect::<Vec<f64>>();
    let omega: Vec<Mat<f64>> = t.omega.iter().map(|m| m.map(f)).collect();
    Ok(assemble(&v(&t.c), &omega, &t.gamma.map(f), &inner.a.map(f), &v(&inner.b), &v(&inner.c)))
}

/// All GARK tree conditions through order `p` on the assembled tables, with three
/// colors `F`, `E`, `I`. This is independent of the simplified coupling conditions
/// and serves as a cross-check on them.
pub fn check_gark_order(g: &GarkTables<Rational>, p: usize) -> OrderReport {
    let s = g.cs.len();
    let dims = [g.cf.len(), s, s];
    let block = |parent: usize, child: usize| -> &Mat<Rational> {
        match (parent, child) {
            (0, 0) => &g.aff,
            (0, 1) => &g.afe,
            (0, _) => &g.afi,
            (_, 0) => &g.asf,
            (_, 1) => &g.ase,
            _ => &g.asi,
        }
    };
    let weights = |root: usize| -> &[Rational] {
        match root {
            0 => &g.bf,
            1 => &g.be,
            _ => &g.bi,
        }
    };
    let mut r = OrderReport {
        title: format!("GARK order {p}"),
        order: p,
        conditions: Vec::new(),
    };
    for (q, level) in colored_trees(p, 3).iter().enumerate().skip(1) {
        for tree in level {
            r.conditions.push(Condition::new(
                tree.label(&['F', 'E', 'I']),
                q,
                tree.residual(&dims, &block, &weights),
            ));
        }
    }
    r
}

/// One step of the flattened method on `y' = (λF + λE + λI) y`, solving the coupled
/// stage equations for all fast and slow stages at once.
pub fn gark_linear_step(g: &GarkTables<f64>, lf: f64, le: f64, li: f64, h: f64, y0: f64) -> Result<f64> {
    let nf = g.cf.len();
    let s = g.cs.len();
    let n = nf + s;
    // [I - H(λF AFF)   -H(λE AFE + λI AFI)] [V]   [y0]
    // [-H λF ASF       I - H(λE ASE + λI ASI)] [Y] = [y0]
    let m = Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        let v = match (i < nf, j < nf) {
            (true, true) => lf * g.aff[(i, j)],
            (true, false) => le * g.afe[(i, j - nf)] + li * g.afi[(i, j - nf)],
            (false, true) => lf * g.asf[(i - nf, j)],
            (false, false) => le * g.ase[(i - nf, j - nf)] + li * g.asi[(i - nf, j - nf)],
        };
        id - h * v
    });
    let x = m.solve(&vec![y0; n])?;
    // stiffly accurate: the step result is the last slow stage
    Ok(x[n - 1])
}
