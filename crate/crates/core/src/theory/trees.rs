//! Colored rooted trees and their elementary weights.
//!
//! A tree with `m` colors stands for one order condition of an additive
//! (or generalized additive) Runge–Kutta method. Children are stored in a
//! canonical order so every unordered tree appears exactly once.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::linalg::Mat;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredTree {
    pub color: usize,
    pub children: Vec<ColoredTree>,
}

impl ColoredTree {
    pub fn order(&self) -> usize {
        1 + self.children.iter().map(ColoredTree::order).sum::<usize>()
    }

    /// Density `γ(t) = |t| ∏ γ(child)`.
    pub fn density(&self) -> BigInt {
        self.children
            .iter()
            .fold(BigInt::from(self.order()), |acc, ch| acc * ch.density())
    }

    /// Bracket notation such as `E[I,E[F]]`, using one letter per color.
    pub fn label(&self, letters: &[char]) -> String {
        let mut s = letters[self.color].to_string();
        if !self.children.is_empty() {
            s.push('[');
            let inner: Vec<String> = self.children.iter().map(|c| c.label(letters)).collect();
            s.push_str(&inner.join(","));
            s.push(']');
        }
        s
    }

    /// Elementary weight vector: leaves give `1`, an internal node multiplies
    /// `A^{(parent, child)} Ψ(child)` over its children elementwise. `dims[σ]` is
    /// the stage count of color `σ`.
    pub fn psi<'a>(
        &self,
        dims: &[usize],
        block: &impl Fn(usize, usize) -> &'a Mat<Rational>,
    ) -> Vec<Rational> {
        let mut out = vec![Rational::one(); dims[self.color]];
        for ch in &self.children {
            let v = block(self.color, ch.color).matvec(&ch.psi(dims, block));
            for (o, x) in out.iter_mut().zip(v) {
                if !o.is_zero() {
                    *o *= x;
                }
            }
        }
        out
    }

    /// `b^{(root)} · Ψ(t) − 1/γ(t)`.
    pub fn residual<'a>(
        &self,
        dims: &[usize],
        block: &impl Fn(usize, usize) -> &'a Mat<Rational>,
        weights: &impl Fn(usize) -> &'a [Rational],
    ) -> Rational {
        let psi = self.psi(dims, block);
        let phi = weights(self.color)
            .iter()
            .zip(&psi)
            .filter(|(b, _)| !b.is_zero())
            .fold(Rational::zero(), |acc, (b, p)| acc + b * p);
        phi - Rational::new(BigInt::one(), self.density())
    }
}

/// All trees with `colors` colors, grouped by order `1..=max_order` (index 0 is empty).
pub fn colored_trees(max_order: usize, colors: usize) -> Vec<Vec<ColoredTree>> {
    let mut by_order: Vec<Vec<ColoredTree>> = vec![Vec::new(); max_order + 1];
    for n in 1..=max_order {
        let pool: Vec<&ColoredTree> = by_order[1..n].iter().flatten().collect();
        let mut forests = Vec::new();
        forests_of(&pool, n - 1, 0, &mut Vec::new(), &mut forests);
        let mut level = Vec::with_capacity(colors * forests.len());
        for color in 0..colors {
            for f in &forests {
                level.push(ColoredTree {
                    color,
                    children: f.iter().map(|&i| pool[i].clone()).collect(),
                });
            }
        }
        by_order[n] = level;
    }
    by_order
}

/// Multisets of pool indices (non-decreasing) whose orders sum to `remaining`.
fn forests_of(
    pool: &[&ColoredTree],
    remaining: usize,
    start: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(cur.clone());
        return;
    }
    for idx in start..pool.len() {
        let o = pool[idx].order();
        if o <= remaining {
            cur.push(idx);
            forests_of(pool, remaining - o, idx, cur, out);
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monochrome_counts_match_rooted_tree_sequence() {
        let t = colored_trees(6, 1);
        let counts: Vec<usize> = t[1..].iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20]);
    }

    #[test]
    fn bicolored_counts() {
        // number of rooted trees with 2 vertex colors: 2, 4, 14, 52
        let t = colored_trees(4, 2);
        let counts: Vec<usize> = t[1..].iter().map(Vec::len).collect();
        assert_eq!(counts, vec![2, 4, 14, 52]);
    }

    #[test]
    fn densities_of_order_four_trees() {
        let t = colored_trees(4, 1);
        let mut d: Vec<i64> = t[4].iter().map(|x| x.density().try_into().unwrap()).collect();
        d.sort();
        assert_eq!(d, vec![4, 8, 12, 24]);
    }

    #[test]
    fn labels_are_unique() {
        let t = colored_trees(4, 3);
        let mut labels: Vec<String> = t.iter().flatten().map(|x| x.label(&['F', 'E', 'I'])).collect();
        let n = labels.len();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), n);
    }
}
