use super::Tensor;

/// Constant sparse matrix in row-compressed form. Used for neighborhood
/// aggregation; it is never differentiated itself.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, weight)` lists.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in &rows {
            for &(c, w) in row {
                debug_assert!(c < cols);
                indices.push(c);
                values.push(w);
            }
            offsets.push(indices.len());
        }
        SparseMatrix {
            rows: rows.len(),
            cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(&[self.rows, self.cols]);
        for r in 0..self.rows {
            for (c, w) in self.row(r) {
                t.data_mut()[r * self.cols + c] += w;
            }
        }
        t
    }

    /// `out = self · x` where `x` has `self.cols` rows of width `width`.
    pub(crate) fn mul_dense(&self, x: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * width];
        for r in 0..self.rows {
            let dst = &mut out[r * width..(r + 1) * width];
            for (c, w) in self.row(r) {
                for (o, &xv) in dst.iter_mut().zip(&x[c * width..(c + 1) * width]) {
                    *o += w * xv;
                }
            }
        }
        out
    }

    /// `out += selfᵀ · g` where `g` has `self.rows` rows of width `width`.
    pub(crate) fn mul_transpose_acc(&self, g: &[f64], width: usize, out: &mut [f64]) {
        for r in 0..self.rows {
            let src = &g[r * width..(r + 1) * width];
            for (c, w) in self.row(r) {
                for (o, &gv) in out[c * width..(c + 1) * width].iter_mut().zip(src) {
                    *o += w * gv;
                }
            }
        }
    }
}
