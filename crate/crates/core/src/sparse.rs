//! Compressed sparse row storage for symmetric graph operators.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::scalar::Real;

/// Row-major compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from unsorted triplets; duplicate coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); rows];
        for &(i, j, v) in triplets {
            per_row[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for row in per_row.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let (j, mut v) = row[k];
                k += 1;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs stored in row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: ArrayView1<T>) -> Array1<T> {
        assert_eq!(x.len(), self.cols);
        Array1::from_shape_fn(self.rows, |i| self.row(i).fold(T::zero(), |acc, (j, v)| acc + v * x[j]))
    }

    /// `Aᵀ x`.
    pub fn mul_vec_transpose(&self, x: ArrayView1<T>) -> Array1<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = Array1::zeros(self.cols);
        for i in 0..self.rows {
            let xi = x[i];
            for (j, v) in self.row(i) {
                out[j] += v * xi;
            }
        }
        out
    }

    /// `A X` for a dense `cols × K` block. Each output row is an independent
    /// fixed-order sum, so the parallel result equals the sequential one.
    pub fn mul_mat(&self, x: ArrayView2<T>) -> Array2<T> {
        assert_eq!(x.nrows(), self.cols);
        let mut out = Array2::zeros((self.rows, x.ncols()));
        let work = self.nnz() * x.ncols();
        let body = |i: usize, mut out_row: ndarray::ArrayViewMut1<T>| {
            for (j, v) in self.row(i) {
                out_row.scaled_add(v, &x.row(j));
            }
        };
        if work > 1 << 16 {
            Zip::indexed(out.axis_iter_mut(Axis(0))).par_for_each(body);
        } else {
            Zip::indexed(out.axis_iter_mut(Axis(0))).for_each(body);
        }
        out
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut d = Array2::zeros((self.rows, self.cols));
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d[[i, j]] += v;
            }
        }
        d
    }
}
