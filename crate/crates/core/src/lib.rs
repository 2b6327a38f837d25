//! Wide-sense stationary signals on weighted undirected graphs.
//!
//! The crate covers graph construction ([`graph`]), spectral filtering and
//! localisation ([`spectral`]), second-order statistics and the
//! stationarity measure ([`stationarity`]), scalable Welch-style PSD
//! estimation ([`psd`]), Wiener-type recovery and convex baselines
//! ([`wiener`]), and synthetic experiments ([`synth`]).
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod psd;
pub mod rng;
pub mod scalar;
pub mod sparse;
pub mod spectral;
pub mod stationarity;
pub mod synth;
pub mod wiener;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Graph64 = graph::Graph<f64>;
pub type Laplacian64 = graph::Laplacian<f64>;
pub type GradientOperator64 = graph::GradientOperator<f64>;
pub type SpectralBasis64 = spectral::SpectralBasis<f64>;
pub type Kernel64 = spectral::Kernel<f64>;
pub type FilterEngine64 = spectral::FilterEngine<f64>;
pub type SignalEnsemble64 = stationarity::SignalEnsemble<f64>;
pub type Filterbank64 = psd::Filterbank<f64>;
pub type PsdEstimate64 = psd::PsdEstimate<f64>;
pub type Operator64 = wiener::Operator<f64>;
pub type WienerProblem64 = wiener::WienerProblem<f64>;

pub type Graph32 = graph::Graph<f32>;
pub type Laplacian32 = graph::Laplacian<f32>;
pub type SpectralBasis32 = spectral::SpectralBasis<f32>;
pub type Kernel32 = spectral::Kernel<f32>;
