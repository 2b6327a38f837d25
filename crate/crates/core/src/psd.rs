//! Welch-style power spectral density estimation.
//!
//! A Gaussian filterbank `g_m(λ) = exp(−(λ − mτ)² / σ²)`, `m = 1..M`, is
//! applied to the signal; for each band the energy `‖g_m(L) x‖²` is
//! averaged over realisations and divided by `‖g_m(L)‖_F²`, itself
//! estimated from random Gaussian probes. Nothing here needs the
//! eigendecomposition unless exact norms are requested.

use log::warn;
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::rng::{normal_columns, stream};
use crate::scalar::Real;
use crate::spectral::{FilterEngine, Kernel, SpectralBasis, DEFAULT_ORDER};
use crate::stationarity::SignalEnsemble;

/// Number of random probes used for the Frobenius norms by default.
pub const DEFAULT_K2: usize = 4;
/// Default number of bands.
pub const DEFAULT_BANDS: usize = 30;

/// Uniformly shifted Gaussian windows covering the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filterbank<T> {
    pub bands: usize,
    pub tau: T,
    pub sigma2: T,
    pub lambda_max: T,
}

/// Filterbank with `τ = σ² = (M+1) λ_max / M²`, which gives neighbouring
/// windows an overlap of about two.
pub fn design_filterbank<T: Real>(lambda_max: T, bands: usize) -> Result<Filterbank<T>> {
    if bands == 0 {
        return Err(Error::InvalidParameter("filterbank needs at least one band".into()));
    }
    if !(lambda_max > T::zero()) {
        return Err(Error::InvalidParameter("lambda_max must be positive".into()));
    }
    let m = T::from_usize_lossy(bands);
    let tau = (m + T::one()) * lambda_max / (m * m);
    Ok(Filterbank { bands, tau, sigma2: tau, lambda_max })
}

impl<T: Real> Filterbank<T> {
    /// Band centres `τ, 2τ, …, Mτ`.
    pub fn centers(&self) -> Vec<T> {
        (1..=self.bands).map(|m| self.tau * T::from_usize_lossy(m)).collect()
    }

    pub fn kernel(&self, m: usize) -> Kernel<T> {
        Kernel::gaussian(self.tau * T::from_usize_lossy(m), self.sigma2)
    }

    /// Kernels `g_1 … g_M`.
    pub fn kernels(&self) -> Vec<Kernel<T>> {
        (1..=self.bands).map(|m| self.kernel(m)).collect()
    }
}

/// Where the normalisation `‖g_m(L)‖_F²` comes from.
#[derive(Debug, Clone)]
pub enum NormSource<'a, T> {
    /// Average of `‖g_m(L) w‖²` over `k2` standard normal probes.
    Stochastic { k2: usize, seed: u64 },
    /// `Σ_ℓ g_m(λ_ℓ)²` from an eigendecomposition.
    Exact(&'a SpectralBasis<T>),
}

/// Squared Frobenius norm of every band, estimated with `k2` probes.
pub fn estimate_filter_norms<T: Real>(
    engine: &FilterEngine<T>,
    fb: &Filterbank<T>,
    k2: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if k2 == 0 {
        return Err(Error::InvalidParameter("K2 must be at least 1".into()));
    }
    let probes: Array2<T> = normal_columns(seed, stream::PROBE, engine.n(), k2);
    band_energies(engine, &fb.kernels(), probes.view())
}

/// Exact `Σ_ℓ g_m(λ_ℓ)²` for every band.
pub fn exact_filter_norms<T: Real>(basis: &SpectralBasis<T>, fb: &Filterbank<T>) -> Vec<T> {
    fb.kernels().iter().map(|k| basis.kernel_values(k).iter().map(|&g| g * g).sum()).collect()
}

/// Mean over columns of `‖g_m(L) x_k‖²`, per kernel.
fn band_energies<T: Real>(engine: &FilterEngine<T>, kernels: &[Kernel<T>], x: ArrayView2<T>) -> Result<Vec<T>> {
    let k = T::from_usize_lossy(x.ncols());
    let outs = engine.apply_bank(kernels, x)?;
    Ok(outs.iter().map(|y| y.iter().map(|&v| v * v).sum::<T>() / k).collect())
}

/// Provenance of a [`PsdEstimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdMeta {
    #[serde(rename = "M")]
    pub bands: usize,
    /// Chebyshev order, `None` for exact spectral filtering.
    pub order: Option<usize>,
    pub k1: usize,
    /// Probe count, `None` for exact norms.
    pub k2: Option<usize>,
    pub seed: u64,
    pub interpolation: String,
}

/// Band estimates `(mτ, γ̄(mτ))`, interpolated linearly between centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PsdEstimate<T> {
    pub lambda_max: T,
    pub points: Vec<[T; 2]>,
    pub meta: PsdMeta,
}

impl<T: Real> PsdEstimate<T> {
    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|p| p[1]).collect()
    }

    pub fn to_kernel(&self) -> Result<Kernel<T>> {
        psd_to_kernel(self)
    }
}

/// Chebyshev estimate with stochastic norms, the scalable path.
pub fn estimate_psd<T: Real>(
    lap: &Laplacian<T>,
    ens: &SignalEnsemble<T>,
    fb: &Filterbank<T>,
    order: usize,
    k2: usize,
    seed: u64,
) -> Result<PsdEstimate<T>> {
    let engine = FilterEngine::chebyshev(lap.clone(), order);
    estimate_psd_with(&engine, ens, fb, NormSource::Stochastic { k2, seed })
}

/// Estimate with an explicit filtering engine and normalisation source.
///
/// Uncentred ensembles are centred first: per vertex when there are at
/// least two realisations, by a single scalar otherwise.
pub fn estimate_psd_with<T: Real>(
    engine: &FilterEngine<T>,
    ens: &SignalEnsemble<T>,
    fb: &Filterbank<T>,
    norms: NormSource<'_, T>,
) -> Result<PsdEstimate<T>> {
    if ens.n_realizations() == 0 || ens.n_vertices() == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if ens.n_vertices() != engine.n() {
        return Err(Error::DimensionMismatch { expected: engine.n(), got: ens.n_vertices() });
    }
    let centered;
    let ens = if ens.is_centered() {
        ens
    } else {
        warn!("signal ensemble is not centred; removing its empirical mean");
        centered = if ens.n_realizations() >= 2 { ens.center() } else { ens.center_scalar() };
        &centered
    };
    let kernels = fb.kernels();
    let energies = band_energies(engine, &kernels, ens.data())?;
    let (norm_values, k2, seed) = match norms {
        NormSource::Stochastic { k2, seed } => (estimate_filter_norms(engine, fb, k2, seed)?, Some(k2), seed),
        NormSource::Exact(basis) => {
            basis.check_len(engine.n())?;
            (exact_filter_norms(basis, fb), None, 0)
        }
    };
    let points = fb
        .centers()
        .into_iter()
        .zip(energies.iter().zip(norm_values.iter()))
        .map(|(c, (&e, &nrm))| {
            let v = if nrm > T::zero() { e / nrm } else { T::zero() };
            [c, v.max(T::zero())]
        })
        .collect();
    let order = match engine {
        FilterEngine::Exact(_) => None,
        FilterEngine::Chebyshev { order, .. } => Some(*order),
    };
    Ok(PsdEstimate {
        lambda_max: fb.lambda_max,
        points,
        meta: PsdMeta {
            bands: fb.bands,
            order,
            k1: ens.n_realizations(),
            k2,
            seed,
            interpolation: "linear".into(),
        },
    })
}

/// Expected value of the estimator for a known PSD `γ`:
/// `Σ_ℓ g_m(λ_ℓ)² γ(λ_ℓ) / Σ_ℓ g_m(λ_ℓ)²` per band.
pub fn bias_oracle<T: Real>(basis: &SpectralBasis<T>, fb: &Filterbank<T>, true_psd: &Kernel<T>) -> Vec<T> {
    let gamma = basis.kernel_values(true_psd);
    fb.kernels()
        .iter()
        .map(|k| {
            let g2 = basis.kernel_values(k).mapv(|g| g * g);
            let den = g2.sum();
            if den > T::zero() {
                g2.dot(&gamma) / den
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Continuous PSD: linear between band centres, constant beyond the first
/// and last centre (so the value at `λ = 0` is the first band's).
pub fn psd_to_kernel<T: Real>(est: &PsdEstimate<T>) -> Result<Kernel<T>> {
    Kernel::sampled(est.points.iter().map(|p| [p[0], p[1].max(T::zero())]).collect())
}

/// Convenience: estimate with the default order, probe count and a
/// filterbank of `bands` windows over the Laplacian's bound.
pub fn estimate_psd_default<T: Real>(
    lap: &Laplacian<T>,
    ens: &SignalEnsemble<T>,
    bands: usize,
    seed: u64,
) -> Result<PsdEstimate<T>> {
    let fb = design_filterbank(lap.lambda_max(), bands)?;
    estimate_psd(lap, ens, &fb, DEFAULT_ORDER, DEFAULT_K2, seed)
}

/// Per-band sample energies of each realisation, `‖g_m(L) x_k‖² / norm_m`,
/// as an `M × K` matrix. Useful for variance studies.
pub fn band_estimates_per_realization<T: Real>(
    engine: &FilterEngine<T>,
    x: ArrayView2<T>,
    fb: &Filterbank<T>,
    norms: &[T],
) -> Result<Array2<T>> {
    let outs = engine.apply_bank(&fb.kernels(), x)?;
    let mut res = Array2::zeros((fb.bands, x.ncols()));
    for (m, y) in outs.iter().enumerate() {
        for (k, col) in y.axis_iter(Axis(1)).enumerate() {
            res[[m, k]] = col.dot(&col) / norms[m];
        }
    }
    Ok(res)
}
