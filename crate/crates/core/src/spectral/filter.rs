use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::scalar::Real;
use crate::spectral::chebyshev::{chebyshev_apply_many, chebyshev_coefficients};
use crate::spectral::{Kernel, SpectralBasis};

/// Default Chebyshev expansion order.
pub const DEFAULT_ORDER: usize = 30;

/// `U g(Λ) Uᵀ X`, column by column.
pub fn filter_exact<T: Real>(basis: &SpectralBasis<T>, kernel: &Kernel<T>, x: ArrayView2<T>) -> Result<Array2<T>> {
    let xhat = basis.gft_mat(x)?;
    let g = basis.kernel_values(kernel);
    let scaled = &xhat * &g.view().insert_axis(Axis(1));
    Ok(basis.u().dot(&scaled))
}

pub fn filter_exact_vec<T: Real>(basis: &SpectralBasis<T>, kernel: &Kernel<T>, x: ArrayView1<T>) -> Result<Array1<T>> {
    let out = filter_exact(basis, kernel, x.insert_axis(Axis(1)))?;
    Ok(out.index_axis_move(Axis(1), 0))
}

/// Chebyshev approximation of `g(L) X` of the given order on `[0, λ_max]`,
/// with `λ_max` the Laplacian's cached upper bound.
pub fn filter_chebyshev<T: Real>(
    lap: &Laplacian<T>,
    kernel: &Kernel<T>,
    x: ArrayView2<T>,
    order: usize,
) -> Result<Array2<T>> {
    if x.nrows() != lap.n() {
        return Err(Error::DimensionMismatch { expected: lap.n(), got: x.nrows() });
    }
    if order == 0 {
        return Err(Error::InvalidParameter("Chebyshev order must be at least 1".into()));
    }
    let coeffs = chebyshev_coefficients(kernel, order, lap.lambda_max());
    Ok(chebyshev_apply_many(lap, &[coeffs], x).pop().expect("one output per coefficient set"))
}

/// How graph filters are applied: through a full eigendecomposition or by
/// Chebyshev polynomials of the Laplacian.
#[derive(Debug, Clone)]
pub enum FilterEngine<T> {
    Exact(Arc<SpectralBasis<T>>),
    Chebyshev { lap: Arc<Laplacian<T>>, order: usize },
}

impl<T: Real> FilterEngine<T> {
    pub fn exact(basis: impl Into<Arc<SpectralBasis<T>>>) -> Self {
        FilterEngine::Exact(basis.into())
    }

    pub fn chebyshev(lap: impl Into<Arc<Laplacian<T>>>, order: usize) -> Self {
        FilterEngine::Chebyshev { lap: lap.into(), order }
    }

    pub fn n(&self) -> usize {
        match self {
            FilterEngine::Exact(b) => b.n(),
            FilterEngine::Chebyshev { lap, .. } => lap.n(),
        }
    }

    /// Spectral interval the kernels are evaluated on.
    pub fn lambda_max(&self) -> T {
        match self {
            FilterEngine::Exact(b) => b.lambda_max(),
            FilterEngine::Chebyshev { lap, .. } => lap.lambda_max(),
        }
    }

    pub fn basis(&self) -> Option<&SpectralBasis<T>> {
        match self {
            FilterEngine::Exact(b) => Some(b),
            FilterEngine::Chebyshev { .. } => None,
        }
    }

    pub fn apply(&self, kernel: &Kernel<T>, x: ArrayView2<T>) -> Result<Array2<T>> {
        match self {
            FilterEngine::Exact(b) => filter_exact(b, kernel, x),
            FilterEngine::Chebyshev { lap, order } => filter_chebyshev(lap, kernel, x, *order),
        }
    }

    pub fn apply_vec(&self, kernel: &Kernel<T>, x: ArrayView1<T>) -> Result<Array1<T>> {
        Ok(self.apply(kernel, x.insert_axis(Axis(1)))?.index_axis_move(Axis(1), 0))
    }

    /// Filters `x` with every kernel in `kernels`, sharing the Chebyshev
    /// recurrence when applicable.
    pub fn apply_bank(&self, kernels: &[Kernel<T>], x: ArrayView2<T>) -> Result<Vec<Array2<T>>> {
        match self {
            FilterEngine::Exact(b) => {
                let xhat = b.gft_mat(x)?;
                Ok(kernels
                    .iter()
                    .map(|k| {
                        let g = b.kernel_values(k);
                        b.u().dot(&(&xhat * &g.view().insert_axis(Axis(1))))
                    })
                    .collect())
            }
            FilterEngine::Chebyshev { lap, order } => {
                if x.nrows() != lap.n() {
                    return Err(Error::DimensionMismatch { expected: lap.n(), got: x.nrows() });
                }
                let coeffs: Vec<Vec<T>> =
                    kernels.iter().map(|k| chebyshev_coefficients(k, *order, lap.lambda_max())).collect();
                Ok(chebyshev_apply_many(lap, &coeffs, x))
            }
        }
    }

    /// Maximum of `|g|` over the spectrum: exact eigenvalues, or 1000 samples
    /// of `[0, λ_max]`.
    pub fn kernel_sup(&self, kernel: &Kernel<T>) -> T {
        match self {
            FilterEngine::Exact(b) => b.kernel_values(kernel).iter().fold(T::zero(), |m, &v| m.max(v.abs())),
            FilterEngine::Chebyshev { lap, .. } => kernel_sup_sampled(kernel, lap.lambda_max(), 1000),
        }
    }
}

fn kernel_sup_sampled<T: Real>(kernel: &Kernel<T>, lambda_max: T, samples: usize) -> T {
    (0..samples)
        .map(|i| {
            let l = lambda_max * T::from_usize_lossy(i) / T::from_usize_lossy(samples - 1);
            kernel.eval_clamped(l, lambda_max).abs()
        })
        .fold(T::zero(), T::max)
}

/// `g(L) δ_i`: the kernel localised at vertex `i`.
pub fn localize<T: Real>(engine: &FilterEngine<T>, kernel: &Kernel<T>, i: usize) -> Result<Array1<T>> {
    let n = engine.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    match engine {
        FilterEngine::Exact(b) => {
            let g = b.kernel_values(kernel);
            let row = b.u().row(i).to_owned() * &g;
            Ok(b.u().dot(&row))
        }
        FilterEngine::Chebyshev { .. } => {
            let mut delta = Array1::zeros(n);
            delta[i] = T::one();
            engine.apply_vec(kernel, delta.view())
        }
    }
}
