//! Second-order statistics of graph signal ensembles and the stationarity
//! measure.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Kernel, SpectralBasis};

/// `K` realisations of a signal on `N` vertices, stored as an `N × K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEnsemble<T> {
    data: Array2<T>,
    mean: Option<Array1<T>>,
    centered: bool,
}

impl<T: Real> SignalEnsemble<T> {
    pub fn new(data: Array2<T>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self { data, mean: None, centered: false })
    }

    /// Ensemble whose realisations are known to have zero mean.
    pub fn zero_mean(data: Array2<T>) -> Result<Self> {
        let mut e = Self::new(data)?;
        e.centered = true;
        Ok(e)
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn n_vertices(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_realizations(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Mean removed by [`center`](Self::center), if any.
    pub fn removed_mean(&self) -> Option<ArrayView1<'_, T>> {
        self.mean.as_ref().map(|m| m.view())
    }

    /// Per-vertex average over realisations.
    pub fn empirical_mean(&self) -> Array1<T> {
        self.data.mean_axis(Axis(1)).expect("ensemble has at least one realisation")
    }

    /// Subtracts the per-vertex mean. Already-centred ensembles are returned
    /// unchanged.
    pub fn center(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        let m = self.empirical_mean();
        let data = &self.data - &m.view().insert_axis(Axis(1));
        Self { data, mean: Some(m), centered: true }
    }

    /// Subtracts one scalar, the mean over all vertices and realisations.
    /// Suitable for a single realisation of a signal with constant mean.
    pub fn center_scalar(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        let c = self.data.mean().expect("non-empty");
        let data = self.data.mapv(|v| v - c);
        Self { data, mean: Some(Array1::from_elem(self.n_vertices(), c)), centered: true }
    }
}

pub fn empirical_mean<T: Real>(ens: &SignalEnsemble<T>) -> Array1<T> {
    ens.empirical_mean()
}

pub fn center<T: Real>(ens: &SignalEnsemble<T>) -> SignalEnsemble<T> {
    ens.center()
}

/// Unbiased sample covariance `1/(K−1) Σ_k (x_k − m)(x_k − m)ᵀ`.
pub fn empirical_covariance<T: Real>(ens: &SignalEnsemble<T>) -> Result<Array2<T>> {
    let k = ens.n_realizations();
    if k < 2 {
        return Err(Error::TooFewRealizations(k));
    }
    let m = ens.empirical_mean();
    let xc = &ens.data - &m.view().insert_axis(Axis(1));
    let mut cov = xc.dot(&xc.t()) / T::from_usize_lossy(k - 1);
    symmetrize(&mut cov);
    Ok(cov)
}

fn symmetrize<T: Real>(a: &mut Array2<T>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (a[[i, j]] + a[[j, i]]) * T::c(0.5);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}

/// Covariance expressed in the graph Fourier basis, `Γ = Uᵀ Σ U`.
#[derive(Debug, Clone)]
pub struct SpectralCovariance<T> {
    gamma: Array2<T>,
}

impl<T: Real> SpectralCovariance<T> {
    pub fn gamma(&self) -> ArrayView2<'_, T> {
        self.gamma.view()
    }

    pub fn into_gamma(self) -> Array2<T> {
        self.gamma
    }

    pub fn stationarity(&self) -> Result<T> {
        stationarity_measure(self.gamma.view())
    }
}

pub fn spectral_covariance<T: Real>(basis: &SpectralBasis<T>, sigma: ArrayView2<T>) -> Result<SpectralCovariance<T>> {
    basis.check_len(sigma.nrows())?;
    basis.check_len(sigma.ncols())?;
    let mut gamma = basis.u().t().dot(&sigma).dot(&basis.u());
    symmetrize(&mut gamma);
    Ok(SpectralCovariance { gamma })
}

/// Relative tolerance below which negative PSD values are treated as
/// round-off and clamped to zero.
pub const NEGATIVE_DIAGONAL_TOL: f64 = 1e-8;

/// Diagonal of `Uᵀ Σ U` averaged over each eigenvalue cluster.
pub fn psd_values<T: Real>(basis: &SpectralBasis<T>, sigma: ArrayView2<T>) -> Result<Vec<(T, T)>> {
    let gamma = spectral_covariance(basis, sigma)?;
    let diag = gamma.gamma.diag();
    let scale = diag.iter().fold(T::one(), |m, &v| m.max(v.abs()));
    let tol = T::c(NEGATIVE_DIAGONAL_TOL) * scale;
    let mut out = Vec::with_capacity(basis.clusters().len());
    for cluster in basis.clusters() {
        let len = T::from_usize_lossy(cluster.len());
        let lambda = cluster.clone().map(|i| basis.lambdas()[i]).sum::<T>() / len;
        let value = cluster.clone().map(|i| diag[i]).sum::<T>() / len;
        if value < -tol {
            return Err(Error::NegativeDiagonal { index: cluster.start, value: value.to_f64_lossy() });
        }
        out.push((lambda, value.max(T::zero())));
    }
    Ok(out)
}

/// Power spectral density read off the spectral covariance, as a sampled
/// kernel with one knot per eigenvalue cluster.
pub fn psd_from_covariance<T: Real>(basis: &SpectralBasis<T>, sigma: ArrayView2<T>) -> Result<Kernel<T>> {
    let knots = psd_values(basis, sigma)?.into_iter().map(|(l, v)| [l, v]).collect();
    Kernel::sampled(knots)
}

/// `‖diag Γ‖₂ / ‖Γ‖_F`, equal to 1 exactly when `Γ` is diagonal.
pub fn stationarity_measure<T: Real>(gamma: ArrayView2<T>) -> Result<T> {
    let total = gamma.iter().map(|&v| v * v).sum::<T>();
    if total == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    let diag = gamma.diag().iter().map(|&v| v * v).sum::<T>();
    Ok((diag / total).sqrt())
}

/// Centred Gram matrix `−½ J D J` with `J = I − 11ᵀ/N`, from a matrix of
/// squared distances.
pub fn gram_from_distances<T: Real>(d: ArrayView2<T>) -> Result<Array2<T>> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.ncols() });
    }
    let scale = d.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = T::c(1e-12) * scale.max(T::one());
    for i in 0..n {
        if d[[i, i]].abs() > tol {
            return Err(Error::NonzeroDiagonal);
        }
        for j in (i + 1)..n {
            if (d[[i, j]] - d[[j, i]]).abs() > tol {
                return Err(Error::AsymmetricInput);
            }
        }
    }
    let nf = T::from_usize_lossy(n);
    let row_means = d.mean_axis(Axis(1)).expect("n > 0");
    let col_means = d.mean_axis(Axis(0)).expect("n > 0");
    let grand = row_means.sum() / nf;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        -T::c(0.5) * (d[[i, j]] - row_means[i] - col_means[j] + grand)
    }))
}

/// Average squared differences between vertices over the columns of `x`:
/// `D[i,j] = (1/K) Σ_k (x_k[i] − x_k[j])²`.
pub fn mean_squared_distances<T: Real>(x: ArrayView2<T>) -> Array2<T> {
    let (n, k) = x.dim();
    let kf = T::from_usize_lossy(k.max(1));
    Array2::from_shape_fn((n, n), |(i, j)| {
        x.row(i).iter().zip(x.row(j).iter()).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / kf
    })
}

/// Summary written by the `stationarity` command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StationarityReport {
    pub s_r: f64,
    pub n: usize,
    pub k: usize,
    pub cluster_count: usize,
    pub threshold: f64,
    pub approximately_stationary: bool,
    /// Leading entries of the PSD as `[λ, γ(λ)]`.
    pub psd_preview: Vec<[f64; 2]>,
}

/// Default `s_r` level above which an ensemble is reported as approximately
/// stationary.
pub const DEFAULT_STATIONARITY_THRESHOLD: f64 = 0.8;

pub fn stationarity_report<T: Real>(
    basis: &SpectralBasis<T>,
    ens: &SignalEnsemble<T>,
    threshold: f64,
    preview: usize,
) -> Result<StationarityReport> {
    let sigma = empirical_covariance(ens)?;
    let s_r = spectral_covariance(basis, sigma.view())?.stationarity()?.to_f64_lossy();
    let psd = psd_values(basis, sigma.view())?;
    Ok(StationarityReport {
        s_r,
        n: ens.n_vertices(),
        k: ens.n_realizations(),
        cluster_count: basis.clusters().len(),
        threshold,
        approximately_stationary: s_r >= threshold,
        psd_preview: psd.iter().take(preview).map(|&(l, v)| [l.to_f64_lossy(), v.to_f64_lossy()]).collect(),
    })
}
