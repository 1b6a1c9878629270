use super::Mat;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: Mat<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Mat<f64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Singular(k));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let m = a[(i, k)] / d;
                a[(i, k)] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        a[(i, j)] -= m * a[(k, j)];
                    }
                }
            }
        }
        Ok(DenseLu { lu: a, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.lu.nrows();
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&b[i + 1..]).map(|(u, x)| u * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
    }
}
