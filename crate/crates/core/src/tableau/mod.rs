//! Exact-rational coefficient sets for IMEX-MRI-SR methods and their inner
//! Runge–Kutta solvers.

mod builtin;
mod butcher;
mod io;
mod merk;

pub use builtin::{builtin_names, default_inner, load_builtin};
pub use butcher::{inner_names, load_inner, ButcherTable, ExplicitRk};
pub use io::{read_tableau, tableau_from_json, tableau_to_json, write_tableau, TableauFile};
pub use merk::{build_merk_tableau, MerkConstraint};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Embedded (lower order) solution rows `ω̂^{k}` and `γ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub omega: Vec<Vec<Rational>>,
    pub gamma: Vec<Rational>,
}

/// An IMEX-MRI-SR method: abscissae, tendency matrices `Ω^{k}`, implicit matrix `Γ`
/// and an optional embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct MriTableau {
    pub name: String,
    pub c: Vec<Rational>,
    pub omega: Vec<Mat<Rational>>,
    pub gamma: Mat<Rational>,
    pub embedding: Option<Embedding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    Shape,
    FirstAbscissa,
    LastAbscissa,
    FirstRowNonzero,
    NotStrictlyLower,
    NotLower,
    EmbeddingLastEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

impl MriTableau {
    /// Number of slow stages `s`.
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Number of tendency matrices `n_Ω`.
    pub fn n_omega(&self) -> usize {
        self.omega.len()
    }

    pub fn has_embedding(&self) -> bool {
        self.embedding.is_some()
    }

    /// `Ω̄ = Σ_k Ω^{k}/(k+1)`.
    pub fn omega_bar(&self) -> Mat<Rational> {
        let s = self.stages();
        let mut out = Mat::zeros(s, s);
        for (k, om) in self.omega.iter().enumerate() {
            let w = rational::rat(1, k as i64 + 1);
            for i in 0..s {
                for j in 0..s {
                    out[(i, j)] = &out[(i, j)] + &om[(i, j)] * &w;
                }
            }
        }
        out
    }

    /// Embedded row `Σ_k ω̂^{k}/(k+1)`, if an embedding is present.
    pub fn embedding_bar(&self) -> Option<Vec<Rational>> {
        let e = self.embedding.as_ref()?;
        let s = self.stages();
        let mut out = vec![rational::zero(); s];
        for (k, row) in e.omega.iter().enumerate() {
            let w = rational::rat(1, k as i64 + 1);
            for j in 0..s {
                out[j] = &out[j] + &row[j] * &w;
            }
        }
        Some(out)
    }

    /// Evaluates `ω_{i,j}(τ) = Σ_k Ω^{k}_{i,j} τ^k` with zero-based stage indices.
    pub fn omega_poly_eval(&self, i: usize, j: usize, tau: f64) -> Result<f64> {
        let s = self.stages();
        if i >= s || j >= i {
            return Err(Error::IndexOutOfRange(format!(
                "need 0 <= j < i < {s}, got i={i}, j={j}"
            )));
        }
        Ok(self
            .omega
            .iter()
            .rev()
            .fold(0.0, |acc, om| acc * tau + rational::to_f64(&om[(i, j)])))
    }

    /// Lists every violated structural invariant; empty means valid.
    pub fn validate_structure(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        let mut push = |kind, message: String| out.push(Finding { kind, message });
        let s = self.stages();
        if s < 2 {
            push(FindingKind::Shape, format!("need at least 2 stages, got {s}"));
            return out;
        }
        if self.omega.is_empty() {
            push(FindingKind::Shape, "no Omega matrices".into());
        }
        let mut square = true;
        for (k, om) in self.omega.iter().enumerate() {
            if om.nrows() != s || om.ncols() != s {
                push(FindingKind::Shape, format!("Omega[{k}] is not {s}x{s}"));
                square = false;
            }
        }
        if self.gamma.nrows() != s || self.gamma.ncols() != s {
            push(FindingKind::Shape, format!("Gamma is not {s}x{s}"));
            square = false;
        }
        if let Some(e) = &self.embedding {
            if e.omega.len() != self.omega.len() {
                push(
                    FindingKind::Shape,
                    format!("embedding has {} omega rows, expected {}", e.omega.len(), self.omega.len()),
                );
            }
            if e.omega.iter().any(|r| r.len() != s) || e.gamma.len() != s {
                push(FindingKind::Shape, format!("embedding rows must have length {s}"));
            }
        }
        if !self.c[0].is_zero() {
            push(FindingKind::FirstAbscissa, format!("c[1] = {} (must be 0)", self.c[0]));
        }
        if !self.c[s - 1].is_one() {
            push(FindingKind::LastAbscissa, format!("c[s] = {} (must be 1)", self.c[s - 1]));
        }
        if let Some(e) = &self.embedding {
            if e.omega.iter().any(|r| r.get(s - 1).is_some_and(|v| !v.is_zero())) {
                push(
                    FindingKind::EmbeddingLastEntry,
                    "embedding omega row has a nonzero last entry (the embedded forcing uses stages 1..s-1)"
                        .into(),
                );
            }
        }
        if !square {
            return out;
        }
        for (k, om) in self.omega.iter().enumerate() {
            if om.row(0).iter().any(|v| !v.is_zero()) {
                push(FindingKind::FirstRowNonzero, format!("Omega[{k}] first row nonzero"));
            }
            for i in 0..s {
                for j in i..s {
                    if !om[(i, j)].is_zero() {
                        push(
                            FindingKind::NotStrictlyLower,
                            format!("Omega[{k}] not strictly lower triangular at ({}, {})", i + 1, j + 1),
                        );
                    }
                }
            }
        }
        if self.gamma.row(0).iter().any(|v| !v.is_zero()) {
            push(FindingKind::FirstRowNonzero, "Gamma first row nonzero".into());
        }
        for i in 0..s {
            for j in i + 1..s {
                if !self.gamma[(i, j)].is_zero() {
                    push(
                        FindingKind::NotLower,
                        format!("Gamma not lower triangular at ({}, {})", i + 1, j + 1),
                    );
                }
            }
        }
        out
    }

    pub fn is_explicit(&self) -> bool {
        self.gamma.as_slice().iter().all(Zero::is_zero)
    }
}

/// Floating-point image of an [`MriTableau`], converted once per run.
#[derive(Debug, Clone)]
pub struct MriMethod {
    pub name: String,
    pub c: Vec<f64>,
    /// `poly[i][j][k] = Ω^{k}_{i,j}`
    pub poly: Vec<Vec<Vec<f64>>>,
    pub gamma: Vec<Vec<f64>>,
    /// `emb_poly[j][k] = ω̂^{k}_j`
    pub emb_poly: Option<Vec<Vec<f64>>>,
    pub emb_gamma: Option<Vec<f64>>,
    c_exact: Vec<Option<(u128, u128)>>,
}

impl MriMethod {
    pub fn new(t: &MriTableau) -> Self {
        let s = t.stages();
        let poly = (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| t.omega.iter().map(|om| rational::to_f64(&om[(i, j)])).collect())
                    .collect()
            })
            .collect();
        let gamma = (0..s).map(|i| t.gamma.row(i).iter().map(rational::to_f64).collect()).collect();
        let emb_poly = t.embedding.as_ref().map(|e| {
            (0..s)
                .map(|j| e.omega.iter().map(|row| rational::to_f64(&row[j])).collect())
                .collect()
        });
        let emb_gamma = t.embedding.as_ref().map(|e| e.gamma.iter().map(rational::to_f64).collect());
        let c_exact = t
            .c
            .iter()
            .map(|ci| {
                if ci.is_negative() {
                    return None;
                }
                Some((ci.numer().to_u128()?, ci.denom().to_u128()?))
            })
            .collect();
        MriMethod {
            name: t.name.clone(),
            c: t.c.iter().map(rational::to_f64).collect(),
            poly,
            gamma,
            emb_poly,
            emb_gamma,
            c_exact,
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn has_embedding(&self) -> bool {
        self.emb_poly.is_some()
    }

    /// `ceil(|c_i| m)` evaluated exactly when `c_i` is a small rational.
    pub fn ceil_c_times(&self, i: usize, m: usize) -> usize {
        match self.c_exact[i] {
            Some((p, q)) => match p.checked_mul(m as u128) {
                Some(pm) => pm.div_ceil(q) as usize,
                None => (self.c[i] * m as f64).ceil() as usize,
            },
            None => (self.c[i].abs() * m as f64).ceil() as usize,
        }
    }

    /// Horner evaluation of `ω_{i,j}(τ)`.
    pub fn omega_at(&self, i: usize, j: usize, tau: f64) -> f64 {
        self.poly[i][j].iter().rev().fold(0.0, |acc, w| acc * tau + w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn builtins_are_structurally_valid() {
        for name in builtin_names() {
            let t = load_builtin(name).unwrap();
            assert!(t.validate_structure().is_empty(), "{name}: {:?}", t.validate_structure());
        }
    }

    #[test]
    fn nonzero_first_row_is_reported() {
        let mut t = load_builtin("imex-mri-sr21").unwrap();
        t.omega[0][(0, 0)] = rat(1, 3);
        let f = t.validate_structure();
        assert!(f.iter().any(|f| f.kind == FindingKind::FirstRowNonzero));
        assert!(f.iter().any(|f| f.kind == FindingKind::NotStrictlyLower));
    }

    #[test]
    fn upper_entry_is_reported() {
        let mut t = load_builtin("imex-mri-sr21").unwrap();
        t.omega[0][(1, 2)] = rat(1, 7);
        let f = t.validate_structure();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, FindingKind::NotStrictlyLower);
        t.gamma[(1, 3)] = rat(1, 7);
        assert!(t.validate_structure().iter().any(|f| f.kind == FindingKind::NotLower));
    }

    #[test]
    fn bad_abscissae_and_shapes_are_reported() {
        let mut t = load_builtin("merk2").unwrap();
        t.c[0] = rat(1, 2);
        t.c[2] = rat(3, 2);
        let kinds: Vec<_> = t.validate_structure().iter().map(|f| f.kind).collect();
        assert!(kinds.contains(&FindingKind::FirstAbscissa));
        assert!(kinds.contains(&FindingKind::LastAbscissa));
        t.gamma = Mat::zeros(2, 2);
        assert!(t.validate_structure().iter().any(|f| f.kind == FindingKind::Shape));
    }

    #[test]
    fn poly_eval_examples() {
        let sr21 = load_builtin("imex-mri-sr21").unwrap();
        assert_eq!(sr21.omega_poly_eval(1, 0, 0.5).unwrap(), 0.6);
        let sr32 = load_builtin("imex-mri-sr32").unwrap();
        assert_eq!(sr32.omega_poly_eval(1, 0, 0.0).unwrap(), 23.0 / 34.0);
        let exact = rat(71, 70) - rat(14453, 63825);
        let v = sr32.omega_poly_eval(2, 0, 1.0).unwrap();
        assert!((v - rational::to_f64(&exact)).abs() < 1e-15);
        assert!((v - 0.787838).abs() < 1e-6);
        assert!(sr32.omega_poly_eval(2, 2, 0.1).is_err());
        assert!(sr32.omega_poly_eval(9, 0, 0.1).is_err());
    }

    #[test]
    fn omega_bar_examples() {
        let sr21 = load_builtin("imex-mri-sr21").unwrap();
        assert_eq!(sr21.omega_bar(), sr21.omega[0]);
        let sr32 = load_builtin("imex-mri-sr32").unwrap();
        let e = &sr32.omega_bar()[(2, 0)];
        assert_eq!(*e, rat(71, 70) + rat(1, 2) * rat(-14453, 63825));
        assert!((rational::to_f64(e) - 0.901062).abs() < 1e-6);
        let merk3 = load_builtin("merk3").unwrap();
        assert_eq!(merk3.omega_bar()[(3, 0)], rat(1, 4));
    }

    #[test]
    fn exact_substep_ceiling() {
        let mut t = load_builtin("merk2").unwrap();
        t.c[1] = rat(7, 100);
        let m = MriMethod::new(&t);
        // 0.07 * 100 rounds above 7 in binary floating point
        assert!((0.07f64 * 100.0).ceil() > 7.0);
        assert_eq!(m.ceil_c_times(1, 100), 7);
        assert_eq!(m.ceil_c_times(1, 101), 8);
        assert_eq!(m.ceil_c_times(0, 10), 0);
        t.c[1] = int(0);
        assert_eq!(MriMethod::new(&t).ceil_c_times(1, 5), 0);
    }

    proptest! {
        // exact integral of the tendency polynomial over [0, 1] equals Ω̄
        #[test]
        fn omega_bar_is_polynomial_mean(idx in 0usize..7, i in 1usize..11, j in 0usize..10) {
            let names = builtin_names();
            let t = load_builtin(names[idx % names.len()]).unwrap();
            let s = t.stages();
            let (i, j) = (i % s, j % s);
            prop_assume!(j < i);
            let mean: f64 = t
                .omega
                .iter()
                .enumerate()
                .map(|(k, om)| rational::to_f64(&om[(i, j)]) / (k as f64 + 1.0))
                .sum();
            // Gauss-Legendre with enough nodes integrates the polynomial exactly
            let nodes = [
                (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
                (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.0, 0.568_888_888_888_888_9),
                (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.906_179_845_938_664, 0.236_926_885_056_189_1),
            ];
            let quad: f64 = nodes
                .iter()
                .map(|&(x, w)| 0.5 * w * t.omega_poly_eval(i, j, 0.5 * (x + 1.0)).unwrap())
                .sum();
            let bar = rational::to_f64(&t.omega_bar()[(i, j)]);
            let scale = 1.0 + t.omega.iter().map(|om| rational::to_f64(&om[(i, j)]).abs()).sum::<f64>();
            prop_assert!((bar - mean).abs() <= 1e-14 * scale);
            prop_assert!((bar - quad).abs() <= 1e-14 * scale);
        }
    }
}
