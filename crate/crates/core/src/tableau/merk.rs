//! Multirate exponential Runge–Kutta methods written as explicit IMEX-MRI-SR tableaux.
//!
//! Stage `i` of a MERK method forces the fast problem with the polynomial that
//! interpolates the slow differences `D_j = F_j − F_1` over a node set, passing
//! through zero at `t = 0`. With `t = c_i τ` this gives
//! `Ω^{k}_{i,j} = c_i^{k+1} · [t^k] L_j(t)` and `Ω^{k}_{i,1} = −Σ_j Ω^{k}_{i,j}`.

use num_traits::Zero;
use serde::Serialize;

use super::MriTableau;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{format_fraction, int, rat, Rational};

/// Abscissa restriction reported by [`build_merk_tableau`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerkConstraint {
    /// Constrained abscissa, e.g. `"c6"`; empty when the order imposes none.
    pub abscissa: String,
    /// Value the restriction requires, as a fraction string; `None` if the formula is singular.
    pub required: Option<String>,
    pub actual: String,
    pub satisfied: bool,
}

type RowSpec = (usize, &'static [usize]);

const MERK2_ROWS: &[RowSpec] = &[(2, &[1])];
const MERK3_ROWS: &[RowSpec] = &[(2, &[1]), (3, &[2])];
const MERK4_ROWS: &[RowSpec] = &[(2, &[1]), (3, &[1]), (4, &[2, 3]), (5, &[2, 3]), (6, &[4, 5])];
const MERK5_ROWS: &[RowSpec] = &[
    (2, &[1]),
    (3, &[1]),
    (4, &[2, 3]),
    (5, &[2, 3]),
    (6, &[2, 3]),
    (7, &[4, 5, 6]),
    (8, &[4, 5, 6]),
    (9, &[4, 5, 6]),
    (10, &[7, 8, 9]),
];

fn layout(order: usize) -> Option<(usize, usize, &'static [RowSpec])> {
    Some(match order {
        2 => (3, 2, MERK2_ROWS),
        3 => (4, 2, MERK3_ROWS),
        4 => (7, 3, MERK4_ROWS),
        5 => (11, 4, MERK5_ROWS),
        _ => return None,
    })
}

/// Default abscissae for each order; MERK2/3 use `c2 = 1/2`.
pub fn default_abscissae(order: usize) -> Vec<Rational> {
    let p: &[(i64, i64)] = match order {
        2 => &[(0, 1), (1, 2), (1, 1)],
        3 => &[(0, 1), (1, 2), (2, 3), (1, 1)],
        4 => &[(0, 1), (1, 2), (1, 2), (1, 3), (5, 6), (1, 3), (1, 1)],
        5 => &[
            (0, 1),
            (1, 2),
            (1, 2),
            (1, 3),
            (1, 2),
            (1, 3),
            (1, 4),
            (7, 10),
            (1, 2),
            (2, 3),
            (1, 1),
        ],
        _ => panic!("no MERK method of order {order}"),
    };
    p.iter().map(|&(a, b)| rat(a, b)).collect()
}

fn checked_inv(x: Rational, what: impl FnOnce() -> String) -> Result<Rational> {
    if x.is_zero() {
        Err(Error::DegenerateAbscissae(what()))
    } else {
        Ok(x.recip())
    }
}

/// Coefficients of `t, t², …` in the Lagrange basis polynomial of node `a` over the
/// node set `{0} ∪ nodes`, normalized to one at `c_a`.
///
/// One node: `α = 1/c_a`. Two nodes `{a, b}`: `α = −c_b/δ`, `β = 1/δ` with
/// `δ = c_a(c_a − c_b)`. Three nodes `{a, b, d}`: `α = c_b c_d/δ`, `β = −(c_b + c_d)/δ`,
/// `γ = 1/δ` with `δ = c_a(c_a − c_b)(c_a − c_d)`.
fn basis_coefficients(c: &[Rational], a: usize, nodes: &[usize]) -> Result<Vec<Rational>> {
    let others: Vec<usize> = nodes.iter().copied().filter(|&j| j != a).collect();
    let mut delta = c[a].clone();
    for &j in &others {
        delta *= &c[a] - &c[j];
    }
    let inv = checked_inv(delta, || {
        let mut msg = format!("c{} = {}", a + 1, format_fraction(&c[a]));
        for &j in &others {
            msg += &format!(", c{} = {}", j + 1, format_fraction(&c[j]));
        }
        format!("zero interpolation denominator ({msg})")
    })?;
    Ok(match others.as_slice() {
        [] => vec![inv],
        [b] => vec![-&c[*b] * &inv, inv],
        [b, d] => vec![&c[*b] * &c[*d] * &inv, -(&c[*b] + &c[*d]) * &inv, inv],
        _ => unreachable!("node sets have at most three entries"),
    })
}

fn from_rows(name: &str, c: Vec<Rational>, n_omega: usize, rows: &[RowSpec]) -> Result<MriTableau> {
    let s = c.len();
    let mut omega = vec![Mat::<Rational>::zeros(s, s); n_omega];
    for i in 1..s {
        omega[0][(i, 0)] = c[i].clone();
    }
    for &(i, nodes) in rows {
        for &j in nodes {
            let coef = basis_coefficients(&c, j, nodes)?;
            let mut ci_pow = c[i].clone();
            for (k, a) in coef.iter().enumerate() {
                ci_pow *= &c[i];
                let v = &ci_pow * a;
                omega[k + 1][(i, 0)] -= &v;
                omega[k + 1][(i, j)] = v;
            }
        }
    }
    Ok(MriTableau {
        name: name.to_string(),
        c,
        omega,
        gamma: Mat::zeros(s, s),
        embedding: None,
    })
}

fn constraint(order: usize, c: &[Rational]) -> MerkConstraint {
    let (idx, required) = match order {
        4 => {
            let c5 = &c[4];
            let den = int(4) - int(6) * c5;
            (5, (!den.is_zero()).then(|| (int(3) - int(4) * c5) / den))
        }
        5 => {
            let (c8, c10) = (&c[7], &c[9]);
            let num = int(12) - int(15) * c10 - int(15) * c8 + int(20) * c10 * c8;
            let den = int(15) - int(20) * c10 - int(20) * c8 + int(30) * c10 * c8;
            (8, (!den.is_zero()).then(|| num / den))
        }
        _ => {
            return MerkConstraint {
                abscissa: String::new(),
                required: None,
                actual: String::new(),
                satisfied: true,
            }
        }
    };
    MerkConstraint {
        abscissa: format!("c{}", idx + 1),
        satisfied: required.as_ref() == Some(&c[idx]),
        required: required.as_ref().map(format_fraction),
        actual: format_fraction(&c[idx]),
    }
}

/// Builds the MERK method of the given order (2–5) for arbitrary abscissae `c`
/// (full length, `c_1 = 0`) and reports the abscissa restriction that orders 4
/// and 5 need for their full order.
pub fn build_merk_tableau(order: usize, c: &[Rational]) -> Result<(MriTableau, MerkConstraint)> {
    let (s, n_omega, rows) = layout(order)
        .ok_or_else(|| Error::InvalidTableau(format!("no MERK method of order {order}")))?;
    if c.len() != s {
        return Err(Error::InvalidTableau(format!(
            "MERK{order} needs {s} abscissae, got {}",
            c.len()
        )));
    }
    if !c[0].is_zero() {
        return Err(Error::InvalidTableau("MERK abscissae must start at 0".into()));
    }
    let t = from_rows(&format!("merk{order}"), c.to_vec(), n_omega, rows)?;
    Ok((t, constraint(order, c)))
}

fn builtin(order: usize) -> MriTableau {
    build_merk_tableau(order, &default_abscissae(order)).expect("default MERK abscissae").0
}

pub(super) fn merk2() -> MriTableau {
    builtin(2)
}

pub(super) fn merk3() -> MriTableau {
    builtin(3)
}

pub(super) fn merk4() -> MriTableau {
    builtin(4)
}

pub(super) fn merk5() -> MriTableau {
    builtin(5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, to_f64, zero};

    /// Expands `t ∏_{m≠a} (t − c_m) / (c_a ∏_{m≠a} (c_a − c_m))` by polynomial multiplication.
    fn lagrange_oracle(c: &[Rational], a: usize, nodes: &[usize]) -> Vec<Rational> {
        let mut poly = vec![zero(), one()]; // t
        let mut den = c[a].clone();
        for &m in nodes.iter().filter(|&&m| m != a) {
            let mut next = vec![zero(); poly.len() + 1];
            for (k, p) in poly.iter().enumerate() {
                next[k + 1] += p;
                next[k] -= p * &c[m];
            }
            poly = next;
            den *= &c[a] - &c[m];
        }
        poly.iter().map(|p| p / &den).collect()
    }

    #[test]
    fn closed_forms_match_lagrange_expansion() {
        for order in 2..=5 {
            let (s, n_omega, rows) = layout(order).unwrap();
            let c = default_abscissae(order);
            let t = builtin(order);
            assert_eq!((t.stages(), t.n_omega()), (s, n_omega));
            for &(i, nodes) in rows {
                for &j in nodes {
                    let poly = lagrange_oracle(&c, j, nodes);
                    assert!(poly[0].is_zero());
                    for k in 1..poly.len() {
                        let expect = &poly[k] * num_traits::pow(c[i].clone(), k + 1);
                        assert_eq!(t.omega[k][(i, j)], expect, "MERK{order} Ω{k}({},{})", i + 1, j + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn merk2_matrices() {
        let t = builtin(2);
        assert_eq!(t.omega[0][(1, 0)], rat(1, 2));
        assert_eq!(t.omega[0][(2, 0)], rat(1, 1));
        assert_eq!(t.omega[1].row(2), &[rat(-2, 1), rat(2, 1), rat(0, 1)]);
        assert!(t.is_explicit());
    }

    #[test]
    fn merk3_matrices() {
        let t = builtin(3);
        // (2/3)^2 / (1/2)
        assert_eq!(t.omega[1][(2, 1)], rat(8, 9));
        assert_eq!(t.omega[1].row(3), &[rat(-3, 2), rat(0, 1), rat(3, 2), rat(0, 1)]);
    }

    #[test]
    fn merk4_constraint_holds_for_default_abscissae() {
        let (_, k) = build_merk_tableau(4, &default_abscissae(4)).unwrap();
        assert_eq!(k.abscissa, "c6");
        assert_eq!(k.required.as_deref(), Some("1/3"));
        assert!(k.satisfied);
        let mut c = default_abscissae(4);
        c[5] = rat(2, 5);
        assert!(!build_merk_tableau(4, &c).unwrap().1.satisfied);
    }

    #[test]
    fn merk5_constraint_holds_for_default_abscissae() {
        let (_, k) = build_merk_tableau(5, &default_abscissae(5)).unwrap();
        assert_eq!(k.abscissa, "c9");
        assert_eq!(k.required.as_deref(), Some("1/2"));
        assert!(k.satisfied);
    }

    #[test]
    fn coincident_nodes_are_degenerate() {
        let mut c = default_abscissae(4);
        c[3] = c[2].clone();
        assert!(matches!(build_merk_tableau(4, &c), Err(Error::DegenerateAbscissae(_))));
        let mut c = default_abscissae(5);
        c[1] = zero();
        assert!(matches!(build_merk_tableau(5, &c), Err(Error::DegenerateAbscissae(_))));
    }

    #[test]
    fn wrong_length_or_order_rejected() {
        assert!(build_merk_tableau(4, &default_abscissae(5)).is_err());
        assert!(build_merk_tableau(6, &default_abscissae(5)).is_err());
    }

    #[test]
    fn last_row_interpolates_at_one() {
        let t = builtin(5);
        let w: f64 = (0..11).map(|j| t.omega_poly_eval(10, j, 1.0).unwrap_or(0.0)).sum();
        assert!((w - to_f64(&t.c[10])).abs() < 1e-14);
    }
}
