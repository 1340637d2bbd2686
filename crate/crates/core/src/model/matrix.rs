//! Minimal row-major matrix; just enough linear algebra for the encoder.

/// Dense `rows x cols` matrix of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape/data mismatch");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length != cols");
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `self^T * y` for a column vector `y` (length `rows`).
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "vector length != rows");
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.row(r)) {
                *o += yr * v;
            }
        }
        out
    }

    /// Rank-1 update `self += scale * y * x^T`.
    pub fn add_outer(&mut self, scale: f64, y: &[f64], x: &[f64]) {
        assert_eq!(y.len(), self.rows, "outer lhs != rows");
        assert_eq!(x.len(), self.cols, "outer rhs != cols");
        for (r, &yr) in y.iter().enumerate() {
            let s = scale * yr;
            if s == 0.0 {
                continue;
            }
            for (o, &xv) in self.row_mut(r).iter_mut().zip(x) {
                *o += s * xv;
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(out: &mut [f64], scale: f64, x: &[f64]) {
    assert_eq!(out.len(), x.len(), "axpy of unequal lengths");
    for (o, &v) in out.iter_mut().zip(x) {
        *o += scale * v;
    }
}
