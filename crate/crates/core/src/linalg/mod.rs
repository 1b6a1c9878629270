//! Small dense matrix type plus dense and banded LU factorizations.

mod banded;
mod dense;

pub use banded::{BandLu, BandMatrix};
pub use dense::DenseLu;

use std::ops::{Index, IndexMut};

use num_traits::Zero;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Clone + Zero> Mat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend(r);
        }
        Mat { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, rhs: &Mat<T>) -> Mat<T>
    where
        for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
    {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out: Mat<T> = Mat::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let p = a * &rhs[(k, j)];
                    out[(i, j)] = out[(i, j)].clone() + p;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T>
    where
        for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
    {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(T::zero(), |acc, (a, x)| acc + a * x)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Mat<T>) -> Mat<T>
    where
        for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
    {
        let mut out = Mat::zeros(self.nrows * rhs.nrows, self.ncols * rhs.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.nrows {
                    for l in 0..rhs.ncols {
                        out[(i * rhs.nrows + k, j * rhs.ncols + l)] = a * &rhs[(k, l)];
                    }
                }
            }
        }
        out
    }
}

impl<T> Mat<T> {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl Mat<f64> {
    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Solves `self x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> crate::Result<Vec<f64>> {
        let lu = DenseLu::factor(self.clone())?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x);
        Ok(x)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

/// Either storage for an implicit Jacobian or Newton matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(Mat<f64>),
    Banded(BandMatrix),
}

impl Matrix {
    pub fn dim(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.nrows(),
            Matrix::Banded(b) => b.dim(),
        }
    }

    /// Returns `I + scale * self`.
    pub fn shifted_identity(&self, scale: f64) -> Matrix {
        match self {
            Matrix::Dense(m) => {
                let n = m.nrows();
                Matrix::Dense(Mat::from_fn(n, n, |i, j| {
                    scale * m[(i, j)] + if i == j { 1.0 } else { 0.0 }
                }))
            }
            Matrix::Banded(b) => Matrix::Banded(b.shifted_identity(scale)),
        }
    }

    pub fn factor(&self) -> crate::Result<Factorization> {
        match self {
            Matrix::Dense(m) => Ok(Factorization::Dense(DenseLu::factor(m.clone())?)),
            Matrix::Banded(b) => Ok(Factorization::Banded(BandLu::factor(b)?)),
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Banded(b) => b.to_dense(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Factorization {
    Dense(DenseLu),
    Banded(BandLu),
}

impl Factorization {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        match self {
            Factorization::Dense(lu) => lu.solve_in_place(rhs),
            Factorization::Banded(lu) => lu.solve_in_place(rhs),
        }
    }
}

/// Solves `a x = rhs` for either storage.
pub fn linear_solve(a: &Matrix, rhs: &[f64]) -> crate::Result<Vec<f64>> {
    let f = a.factor()?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}
