//! Minimal dense row-major f64 matrix, just enough for feature tables and
//! the message-passing network.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from row-major data; panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// `out = w^T x + b` where `w` is `(in_dim x out_dim)`, `x` is `in_dim`,
/// `b` and `out` are `out_dim`. The weight layout keeps one output unit per
/// column so gradients index the same way as the forward pass.
pub fn affine(w: &Matrix, x: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.rows(), x.len());
    debug_assert_eq!(w.cols(), b.len());
    debug_assert_eq!(w.cols(), out.len());
    out.copy_from_slice(b);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let wrow = w.row(i);
        for (o, &wij) in out.iter_mut().zip(wrow.iter()) {
            *o += xi * wij;
        }
    }
}

/// Accumulate the gradients of an affine map: given upstream `d_out`,
/// adds `x ⊗ d_out` into `d_w`, `d_out` into `d_b`, and `w · d_out` into
/// `d_x` (skipped when `d_x` is `None`).
pub fn affine_backward(
    w: &Matrix,
    x: &[f64],
    d_out: &[f64],
    d_w: &mut Matrix,
    d_b: &mut [f64],
    mut d_x: Option<&mut [f64]>,
) {
    for (db, &g) in d_b.iter_mut().zip(d_out.iter()) {
        *db += g;
    }
    for (i, &xi) in x.iter().enumerate() {
        let dw_row = d_w.row_mut(i);
        for (dw, &g) in dw_row.iter_mut().zip(d_out.iter()) {
            *dw += xi * g;
        }
        if let Some(dx) = d_x.as_deref_mut() {
            let wrow = w.row(i);
            let mut acc = 0.0;
            for (&wij, &g) in wrow.iter().zip(d_out.iter()) {
                acc += wij * g;
            }
            dx[i] += acc;
        }
    }
}
