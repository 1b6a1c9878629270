//! Order-condition verification in exact rational arithmetic.

mod gark;
mod trees;

pub use gark::{assemble_gark, assemble_gark_f64, check_gark_order, gark_linear_step, GarkTables};
pub use trees::{colored_trees, ColoredTree};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{self, format_fraction, rat, Rational};
use crate::tableau::MriTableau;

/// One checked condition with its exact residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub label: String,
    pub order: usize,
    #[serde(serialize_with = "ser_fraction")]
    pub residual: Rational,
    /// Condition that follows from the others; kept as a consistency assertion.
    pub implied: bool,
}

fn ser_fraction<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_fraction(r))
}

impl Condition {
    fn new(label: impl Into<String>, order: usize, residual: Rational) -> Self {
        Condition { label: label.into(), order, residual, implied: false }
    }

    pub fn pass(&self) -> bool {
        self.residual.is_zero()
    }

    pub fn residual_f64(&self) -> f64 {
        rational::to_f64(&self.residual)
    }
}

/// A set of residuals; a condition passes only when its residual is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub title: String,
    pub order: usize,
    pub conditions: Vec<Condition>,
}

impl OrderReport {
    fn new(title: impl Into<String>, order: usize) -> Self {
        OrderReport { title: title.into(), order, conditions: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(Condition::pass)
    }

    pub fn failures(&self) -> Vec<&Condition> {
        self.conditions.iter().filter(|c| !c.pass()).collect()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.conditions.iter().map(|c| c.residual_f64().abs()).fold(0.0, f64::max)
    }

    /// Residuals of the conditions of exactly order `q`.
    pub fn residuals_of_order(&self, q: usize) -> Vec<Rational> {
        self.conditions.iter().filter(|c| c.order == q).map(|c| c.residual.clone()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }
}

/// The slow base method `(Ω̄, Ω̄ + Γ)` obtained when the fast function vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArkPair {
    pub ae: Mat<Rational>,
    pub ai: Mat<Rational>,
    pub be: Vec<Rational>,
    pub bi: Vec<Rational>,
    pub c: Vec<Rational>,
}

impl ArkPair {
    /// Same pair with different weights, e.g. an embedding.
    pub fn with_weights(&self, be: Vec<Rational>, bi: Vec<Rational>) -> ArkPair {
        ArkPair { be, bi, ..self.clone() }
    }
}

pub fn base_ark(t: &MriTableau) -> ArkPair {
    let ae = t.omega_bar();
    let s = t.stages();
    let ai = Mat::from_fn(s, s, |i, j| &ae[(i, j)] + &t.gamma[(i, j)]);
    let be = ae.row(s - 1).to_vec();
    let bi = ai.row(s - 1).to_vec();
    let ones = vec![rational::one(); s];
    let c = ae.matvec(&ones);
    ArkPair { ae, ai, be, bi, c }
}

/// Base pair with the embedded weights `b̂E = Σ_k ω̂^{k}/(k+1)`, `b̂I = b̂E + γ̂`.
pub fn embedded_base_ark(t: &MriTableau) -> Option<ArkPair> {
    let e = t.embedding.as_ref()?;
    let be = t.embedding_bar()?;
    let bi = be.iter().zip(&e.gamma).map(|(a, b)| a + b).collect();
    Some(base_ark(t).with_weights(be, bi))
}

fn max_abs(v: impl IntoIterator<Item = Rational>) -> Rational {
    v.into_iter().map(|x| x.abs()).max().unwrap_or_else(rational::zero)
}

fn row_sums(m: &Mat<Rational>) -> Vec<Rational> {
    m.rows().map(|r| r.iter().fold(rational::zero(), |a, x| a + x)).collect()
}

/// Max-norm residuals of `Ω^{0}·1 = c`, `Ω^{k}·1 = 0` (k ≥ 1), `Γ·1 = 0`, and the
/// embedded analogues `ω̂^{0}·1 = 1`, `ω̂^{k}·1 = 0`, `γ̂·1 = 0`.
pub fn check_internal_consistency(t: &MriTableau) -> OrderReport {
    let mut r = OrderReport::new(format!("{}: internal consistency", t.name), 2);
    for (k, om) in t.omega.iter().enumerate() {
        let sums = row_sums(om);
        let res = if k == 0 {
            max_abs(sums.iter().zip(&t.c).map(|(a, b)| a - b))
        } else {
            max_abs(sums)
        };
        let label = if k == 0 { "Omega0*1 - c".to_string() } else { format!("Omega{k}*1") };
        r.conditions.push(Condition::new(label, 2, res));
    }
    r.conditions.push(Condition::new("Gamma*1", 2, max_abs(row_sums(&t.gamma))));
    if let Some(e) = &t.embedding {
        for (k, row) in e.omega.iter().enumerate() {
            let sum = row.iter().fold(rational::zero(), |a, x| a + x);
            let target = if k == 0 { rational::one() } else { rational::zero() };
            r.conditions.push(Condition::new(format!("embOmega{k}*1"), 2, (sum - target).abs()));
        }
        let sum = e.gamma.iter().fold(rational::zero(), |a, x| a + x);
        r.conditions.push(Condition::new("embGamma*1", 2, sum.abs()));
    }
    r
}

/// Weights applied on the left of the coupling conditions: the last rows of `Ω^{k}`
/// and `Γ` for the method, or `ω̂^{k}`, `γ̂` for its embedding.
struct LeftRows<'a> {
    omega: Vec<&'a [Rational]>,
    gamma: &'a [Rational],
}

impl<'a> LeftRows<'a> {
    fn primary(t: &'a MriTableau) -> Self {
        let s = t.stages();
        LeftRows { omega: t.omega.iter().map(|m| m.row(s - 1)).collect(), gamma: t.gamma.row(s - 1) }
    }

    fn embedded(t: &'a MriTableau) -> Option<Self> {
        let e = t.embedding.as_ref()?;
        Some(LeftRows { omega: e.omega.iter().map(Vec::as_slice).collect(), gamma: &e.gamma })
    }

    /// `Σ_k w(k) ω^{k}·x`.
    fn weighted(&self, x: &[Rational], w: impl Fn(i64) -> Rational) -> Rational {
        self.omega
            .iter()
            .enumerate()
            .fold(rational::zero(), |acc, (k, row)| acc + dot(row, x) * w(k as i64))
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_zero())
        .fold(rational::zero(), |acc, (x, y)| acc + x * y)
}

fn hadamard(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn weighted_sum(t: &MriTableau, w: impl Fn(i64) -> Rational) -> Mat<Rational> {
    let s = t.stages();
    let mut out = Mat::zeros(s, s);
    for (k, om) in t.omega.iter().enumerate() {
        let wk = w(k as i64);
        for i in 0..s {
            for j in 0..s {
                if !om[(i, j)].is_zero() {
                    out[(i, j)] = &out[(i, j)] + &om[(i, j)] * &wk;
                }
            }
        }
    }
    out
}

fn coupling_conditions(t: &MriTableau, rows: &LeftRows<'_>, p: usize) -> Vec<Condition> {
    let c = &t.c;
    let w2 = |k: i64| rat(1, (k + 1) * (k + 2));
    let w3 = |k: i64| rat(1, (k + 1) * (k + 3));
    let mut out = Vec::new();
    if p == 3 {
        out.push(Condition::new("e'W2 c = 1/6", 3, rows.weighted(c, w2) - rat(1, 6)));
        return out;
    }
    let w2m = weighted_sum(t, w2);
    let obar = t.omega_bar();
    let cc = hadamard(c, c);
    let w2c = w2m.matvec(c);
    let c_w2c = hadamard(c, &w2c);
    let obar_c = obar.matvec(c);
    let gamma_c = t.gamma.matvec(c);
    out.push(Condition::new("e'W3 c = 1/8", 4, rows.weighted(c, w3) - rat(1, 8)));
    out.push(Condition::new("e'W2 C c = 1/12", 4, rows.weighted(&cc, w2) - rat(1, 12)));
    out.push(Condition::new("e'Gamma C W2 c = 0", 4, dot(rows.gamma, &c_w2c)));
    out.push(Condition::new(
        "e'Obar C W2 c = 1/24",
        4,
        rows.weighted(&c_w2c, |k| rat(1, k + 1)) - rat(1, 24),
    ));
    out.push(Condition::new("e'W2 Obar c = 1/24", 4, rows.weighted(&obar_c, w2) - rat(1, 24)));
    out.push(Condition::new("e'W2 Gamma c = 0", 4, rows.weighted(&gamma_c, w2)));
    let mut implied = Condition::new(
        "e'W4 c = 1/24",
        4,
        rows.weighted(c, |k| rat(1, (k + 1) * (k + 2) * (k + 3))) - rat(1, 24),
    );
    implied.implied = true;
    out.push(implied);
    out
}

/// Coupling conditions between the fast and slow tables at order `p` (3 or 4).
///
/// Order 3 is the single condition `e'(Σ_k Ω^{k}/((k+1)(k+2))) c = 1/6`. Order 4 adds
/// six conditions with `W2 = Σ_k Ω^{k}/((k+1)(k+2))`, `W3 = Σ_k Ω^{k}/((k+1)(k+3))`:
///
/// | label | condition |
/// |---|---|
/// | `e'W3 c = 1/8` | |
/// | `e'W2 C c = 1/12` | `C = diag(c)` |
/// | `e'Gamma C W2 c = 0` | |
/// | `e'Obar C W2 c = 1/24` | |
/// | `e'W2 Obar c = 1/24` | |
/// | `e'W2 Gamma c = 0` | |
///
/// plus `e'(Σ_k Ω^{k}/((k+1)(k+2)(k+3))) c = 1/24`, flagged `implied`: its weights are
/// `W2 − W3`, so it follows from the order 3 condition and `e'W3 c = 1/8`.
pub fn check_coupling_order(t: &MriTableau, p: usize) -> Result<OrderReport> {
    if !(3..=4).contains(&p) {
        return Err(Error::OrderUnavailable(p));
    }
    let mut r = OrderReport::new(format!("{}: coupling order {p}", t.name), p);
    r.conditions = coupling_conditions(t, &LeftRows::primary(t), p);
    Ok(r)
}

/// Coupling conditions with the embedded rows on the left.
pub fn check_embedded_coupling_order(t: &MriTableau, p: usize) -> Result<OrderReport> {
    if !(3..=4).contains(&p) {
        return Err(Error::OrderUnavailable(p));
    }
    let rows = LeftRows::embedded(t).ok_or(Error::DegenerateEmbedding(p))?;
    let mut r = OrderReport::new(format!("{}: embedded coupling order {p}", t.name), p);
    r.conditions = coupling_conditions(t, &rows, p);
    Ok(r)
}

/// Every additive Runge–Kutta condition through order `p`, one per bicolored rooted
/// tree: `b^{σ(root)}·Ψ(t) = 1/γ(t)` where an internal node multiplies
/// `A^{σ(child)} Ψ(child)` over its children. This covers the conditions of each
/// table alone (monochrome trees) and every coupling condition between them.
/// There are 2, 4, 14 and 52 trees at orders 1 to 4.
pub fn check_ark_order(ark: &ArkPair, p: usize) -> OrderReport {
    let mut r = OrderReport::new(format!("ARK order {p}"), p);
    let dims = [ark.be.len(); 2];
    let mats = [&ark.ae, &ark.ai];
    let ws = [ark.be.as_slice(), ark.bi.as_slice()];
    let block = |_: usize, child: usize| mats[child];
    let weights = |root: usize| ws[root];
    for (q, level) in colored_trees(p, 2).iter().enumerate().skip(1) {
        for tree in level {
            r.conditions.push(Condition::new(
                tree.label(&['E', 'I']),
                q,
                tree.residual(&dims, &block, &weights),
            ));
        }
    }
    r
}

/// Classical Runge–Kutta conditions through order `p` for `(A, b)`.
pub fn check_rk_order(a: &Mat<Rational>, b: &[Rational], p: usize) -> OrderReport {
    let mut r = OrderReport::new(format!("RK order {p}"), p);
    let dims = [b.len()];
    let block = |_: usize, _: usize| a;
    let weights = |_: usize| b;
    for (q, level) in colored_trees(p, 1).iter().enumerate().skip(1) {
        for tree in level {
            r.conditions.push(Condition::new(tree.label(&['t']), q, tree.residual(&dims, &block, &weights)));
        }
    }
    r
}

/// Largest `p ≤ 4` for which the method is certified with an inner method of order
/// `inner_order`: the base pair has order `p`, internal consistency holds for
/// `p ≥ 2`, the coupling conditions hold for `p ≥ 3`, and the inner order meets
/// `max(3, n_Ω + 1)` at `p = 3` and `max(4, n_Ω + 2)` at `p = 4`.
pub fn method_order(t: &MriTableau, inner_order: usize) -> usize {
    let ark = base_ark(t);
    let n = t.n_omega();
    let mut order = 0;
    for p in 1..=4 {
        let floor = match p {
            1 | 2 => p,
            3 => 3.max(n + 1),
            _ => 4.max(n + 2),
        };
        if inner_order < floor {
            break;
        }
        let ark_ok = check_ark_order(&ark, p).conditions.iter().filter(|c| c.order == p).all(Condition::pass);
        let extra_ok = match p {
            1 => true,
            2 => check_internal_consistency(t).all_pass(),
            _ => check_coupling_order(t, p).map(|r| r.all_pass()).unwrap_or(false),
        };
        if !(ark_ok && extra_ok) {
            break;
        }
        order = p;
    }
    order
}

/// Order of the embedded solution, checked the same way as [`method_order`].
pub fn embedding_order(t: &MriTableau, inner_order: usize) -> Option<usize> {
    let ark = embedded_base_ark(t)?;
    let n = t.n_omega();
    let mut order = 0;
    for p in 1..=4 {
        let floor = match p {
            1 | 2 => p,
            3 => 3.max(n + 1),
            _ => 4.max(n + 2),
        };
        if inner_order < floor {
            break;
        }
        let ark_ok = check_ark_order(&ark, p).conditions.iter().filter(|c| c.order == p).all(Condition::pass);
        let extra_ok = match p {
            1 => true,
            2 => check_internal_consistency(t).all_pass(),
            _ => check_embedded_coupling_order(t, p).map(|r| r.all_pass()).unwrap_or(false),
        };
        if !(ark_ok && extra_ok) {
            break;
        }
        order = p;
    }
    Some(order)
}

/// Residual vector `τ^{(q)}`: all base-pair tree residuals of order `q`
/// followed by the coupling residuals of order `q`.
fn tau(t: &MriTableau, ark: &ArkPair, rows: &LeftRows<'_>, q: usize) -> Vec<Rational> {
    let mut v = check_ark_order(ark, q).residuals_of_order(q);
    if q >= 3 {
        v.extend(coupling_conditions(t, rows, q).into_iter().filter(|c| !c.implied).map(|c| c.residual));
    }
    v
}

fn norm2(v: &[Rational]) -> f64 {
    v.iter().map(|x| rational::to_f64(x).powi(2)).sum::<f64>().sqrt()
}

/// `‖τ̂^{(p+1)} − τ^{(p+1)}‖₂ / ‖τ̂^{(p)}‖₂` for a method of order `p` whose
/// embedding has order `p − 1`.
pub fn c_statistic(t: &MriTableau, p: usize) -> Result<f64> {
    if p + 1 > 4 {
        return Err(Error::OrderUnavailable(p + 1));
    }
    if p == 0 {
        return Err(Error::DegenerateEmbedding(p));
    }
    let emb_ark = embedded_base_ark(t).ok_or(Error::DegenerateEmbedding(p))?;
    let emb_rows = LeftRows::embedded(t).ok_or(Error::DegenerateEmbedding(p))?;
    let ark = base_ark(t);
    let rows = LeftRows::primary(t);
    let hat_p = tau(t, &emb_ark, &emb_rows, p);
    let den = norm2(&hat_p);
    if den == 0.0 {
        return Err(Error::DegenerateEmbedding(p));
    }
    let hat_next = tau(t, &emb_ark, &emb_rows, p + 1);
    let next = tau(t, &ark, &rows, p + 1);
    let diff: Vec<Rational> = hat_next.iter().zip(&next).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / den)
}

#[cfg(test)]
mod tests;
