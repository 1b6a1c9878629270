use super::Mat;
use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores a window of `2 kl + ku + 1` columns starting at `i - kl`, so the
/// fill-in produced by row interchanges during LU fits without reallocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        // column j lives at offset j + kl - i in row i's window
        let off = (j + self.kl).checked_sub(i)?;
        (off < self.width).then_some(i * self.width + off)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets entry `(i, j)`; panics when it lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j).expect("in band");
        self.data[s] = v;
    }

    pub fn shifted_identity(&self, scale: f64) -> BandMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= scale);
        for i in 0..self.n {
            let s = out.slot(i, i).expect("diagonal");
            out.data[s] += 1.0;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Banded LU with partial pivoting; cost `O(n kl (kl + ku))`.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let mut m = a.clone();
        let n = m.n;
        let (kl, ku) = (m.kl, m.ku);
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let (p, pmax) = (k..=last)
                .map(|i| (i, m.get(i, k).abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Singular(k));
            }
            piv.push(p);
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = m.get(k, j);
                    let b = m.get(p, j);
                    let sk = m.slot(k, j).expect("window");
                    let sp = m.slot(p, j).expect("window");
                    m.data[sk] = b;
                    m.data[sp] = a;
                }
            }
            let d = m.get(k, k);
            for i in k + 1..=last {
                let si = m.slot(i, k).expect("window");
                let l = m.data[si] / d;
                m.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let u = m.get(k, j);
                        if u != 0.0 {
                            let s = m.slot(i, j).expect("window");
                            m.data[s] -= l * u;
                        }
                    }
                }
            }
        }
        Ok(BandLu { m, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        let (kl, ku) = (m.kl, m.ku);
        // forward: apply the interchanges and multipliers in factorization order
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let last = (k + kl).min(n - 1);
            let bk = b[k];
            if bk != 0.0 {
                for (i, bi) in b.iter_mut().enumerate().take(last + 1).skip(k + 1) {
                    *bi -= m.get(i, k) * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let jmax = (i + kl + ku).min(n - 1);
            let s: f64 = (i + 1..=jmax).map(|j| m.get(i, j) * b[j]).sum();
            b[i] = (b[i] - s) / m.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn pivoting_band_solve_matches_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(12, 2, 1), (9, 3, 3), (20, 1, 4), (6, 0, 2)] {
            let mut a = BandMatrix::zeros(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal forces row interchanges
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    a.set(i, j, if i == j { 0.1 * v } else { v });
                }
            }
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lu = BandLu::factor(&a).unwrap();
            let mut x = rhs.clone();
            lu.solve_in_place(&mut x);
            let r = a.matvec(&x);
            for (ri, bi) in r.iter().zip(&rhs) {
                assert!((ri - bi).abs() < 1e-9, "n={n} kl={kl} ku={ku}: {ri} vs {bi}");
            }
        }
    }
}
