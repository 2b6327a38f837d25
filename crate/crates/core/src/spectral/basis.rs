use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;
use crate::spectral::Kernel;

/// Largest `N` accepted by [`eigendecompose`].
pub const DEFAULT_DENSE_LIMIT: usize = 5000;

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Full eigendecomposition of a graph Laplacian.
///
/// Eigenvalues ascend; column `ℓ` of `u` is the unit eigenvector of
/// `lambdas[ℓ]` with its first non-negligible entry positive.
#[derive(Debug, Clone)]
pub struct SpectralBasis<T> {
    lambdas: Array1<T>,
    u: Array2<T>,
    clusters: Vec<Range<usize>>,
}

impl<T: Real> SpectralBasis<T> {
    /// Wraps precomputed eigenpairs; `lambdas` must ascend and `u` be
    /// orthonormal.
    pub fn from_parts(lambdas: Array1<T>, u: Array2<T>) -> Result<Self> {
        let n = lambdas.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.ncols() });
        }
        let clusters = group_clusters(lambdas.view());
        Ok(Self { lambdas, u, clusters })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> ArrayView1<'_, T> {
        self.lambdas.view()
    }

    /// Eigenvectors as columns.
    pub fn u(&self) -> ArrayView2<'_, T> {
        self.u.view()
    }

    pub fn lambda_max(&self) -> T {
        self.lambdas.last().copied().unwrap_or(T::zero()).max(T::zero())
    }

    /// Index ranges of numerically repeated eigenvalues.
    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    /// Kernel sampled at every eigenvalue (argument clamped to `[0, λ_max]`).
    pub fn kernel_values(&self, g: &Kernel<T>) -> Array1<T> {
        let top = self.lambda_max();
        self.lambdas.mapv(|l| g.eval_clamped(l, top))
    }

    /// `U diag(values) Uᵀ`.
    pub fn synthesize(&self, values: ArrayView1<T>) -> Array2<T> {
        let scaled = &self.u * &values.insert_axis(Axis(0));
        scaled.dot(&self.u.t())
    }

    /// Dense matrix `g(L)`.
    pub fn kernel_matrix(&self, g: &Kernel<T>) -> Array2<T> {
        self.synthesize(self.kernel_values(g).view())
    }

    pub fn gft(&self, x: ArrayView1<T>) -> Result<Array1<T>> {
        self.check_len(x.len())?;
        Ok(self.u.t().dot(&x))
    }

    pub fn igft(&self, xhat: ArrayView1<T>) -> Result<Array1<T>> {
        self.check_len(xhat.len())?;
        Ok(self.u.dot(&xhat))
    }

    /// Column-wise transform of an `N × K` block.
    pub fn gft_mat(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_len(x.nrows())?;
        Ok(self.u.t().dot(&x))
    }

    pub fn igft_mat(&self, xhat: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_len(xhat.nrows())?;
        Ok(self.u.dot(&xhat))
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got });
        }
        Ok(())
    }
}

fn group_clusters<T: Real>(lambdas: ArrayView1<T>) -> Vec<Range<usize>> {
    let n = lambdas.len();
    let top = lambdas.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let tol = T::c(CLUSTER_TOL) * top.max(T::min_positive_value());
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || lambdas[i] - lambdas[i - 1] >= tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Dense eigendecomposition of `lap`, refusing graphs above
/// [`DEFAULT_DENSE_LIMIT`] vertices.
pub fn eigendecompose<T: Real>(lap: &Laplacian<T>) -> Result<SpectralBasis<T>> {
    eigendecompose_with_limit(lap, DEFAULT_DENSE_LIMIT)
}

pub fn eigendecompose_with_limit<T: Real>(lap: &Laplacian<T>, limit: usize) -> Result<SpectralBasis<T>> {
    let n = lap.n();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    let (mut lambdas, mut u) = symmetric_eigen(lap.to_dense().view())?;
    // L is PSD; round-off negatives are pinned to zero.
    lambdas.mapv_inplace(|l| l.max(T::zero()));
    let tiny = T::c(1e-12);
    for mut col in u.axis_iter_mut(Axis(1)) {
        let lead = col.iter().copied().find(|v| v.abs() > tiny).unwrap_or(T::zero());
        if lead < T::zero() {
            col.mapv_inplace(|v| -v);
        }
    }
    SpectralBasis::from_parts(lambdas, u)
}
