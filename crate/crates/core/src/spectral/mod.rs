//! Graph Fourier analysis and spectral filtering.

mod basis;
pub mod chebyshev;
mod filter;
mod kernel;

pub use basis::{eigendecompose, eigendecompose_with_limit, SpectralBasis, CLUSTER_TOL, DEFAULT_DENSE_LIMIT};
pub use filter::{filter_chebyshev, filter_exact, filter_exact_vec, localize, FilterEngine, DEFAULT_ORDER};
pub use kernel::{FnKernel, Kernel};
