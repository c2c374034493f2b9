//! Row-major dense matrices with just the kernels the dense layers need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copies the listed rows into a new matrix.
    pub fn gather(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self { rows: rows.len(), cols: self.cols, data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `out = x · w + b` where `w` is `in x out` row-major.
pub(crate) fn affine(x: &Matrix, w: &[f64], b: &[f64], out: &mut Matrix) {
    let n_out = b.len();
    debug_assert_eq!(w.len(), x.cols * n_out);
    *out = Matrix::zeros(x.rows, n_out);
    for i in 0..x.rows {
        let z = &mut out.data[i * n_out..(i + 1) * n_out];
        z.copy_from_slice(b);
        for (k, &a) in x.row(i).iter().enumerate() {
            if a != 0.0 {
                axpy(a, &w[k * n_out..(k + 1) * n_out], z);
            }
        }
    }
}

/// `gw += xᵀ · dz`, `gb += Σ_rows dz`.
pub(crate) fn accumulate_weight_grad(x: &Matrix, dz: &Matrix, gw: &mut [f64], gb: &mut [f64]) {
    let n_out = dz.cols;
    for i in 0..x.rows {
        let d = dz.row(i);
        for (g, v) in gb.iter_mut().zip(d) {
            *g += v;
        }
        for (k, &a) in x.row(i).iter().enumerate() {
            if a != 0.0 {
                axpy(a, d, &mut gw[k * n_out..(k + 1) * n_out]);
            }
        }
    }
}

/// `dx = dz · wᵀ`.
pub(crate) fn backprop_input(dz: &Matrix, w: &[f64], n_in: usize) -> Matrix {
    let n_out = dz.cols;
    let mut dx = Matrix::zeros(dz.rows, n_in);
    for i in 0..dz.rows {
        let d = dz.row(i);
        for k in 0..n_in {
            dx.data[i * n_in + k] = dot(d, &w[k * n_out..(k + 1) * n_out]);
        }
    }
    dx
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
