use crate::integrator::SplitIvp;
use crate::linalg::{Mat, Matrix};

/// Scalar test equation `y' = λF y + λE y + λI y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearScalar {
    pub lf: f64,
    pub le: f64,
    pub li: f64,
    pub y0: f64,
}

impl LinearScalar {
    pub fn new(lf: f64, le: f64, li: f64) -> Self {
        LinearScalar { lf, le, li, y0: 1.0 }
    }

    pub fn exact(&self, t: f64) -> f64 {
        self.y0 * ((self.lf + self.le + self.li) * t).exp()
    }
}

impl SplitIvp for LinearScalar {
    fn dim(&self) -> usize {
        1
    }
    fn t0(&self) -> f64 {
        0.0
    }
    fn y0(&self) -> Vec<f64> {
        vec![self.y0]
    }
    fn fast(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = self.lf * y[0];
    }
    fn explicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = self.le * y[0];
    }
    fn implicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = self.li * y[0];
    }
    fn implicit_jacobian(&self, _t: f64, _y: &[f64]) -> Option<Matrix> {
        Some(Matrix::Dense(Mat::from_rows(vec![vec![self.li]])))
    }
    fn exact(&self, t: f64) -> Option<Vec<f64>> {
        Some(vec![LinearScalar::exact(self, t)])
    }
    fn name(&self) -> String {
        "linear".into()
    }
}
