//! Seed derivation and Gaussian sampling.
//!
//! Every random stream is addressed by `(master seed, purpose tag, index)`,
//! so draws do not depend on scheduling or on how many other streams exist.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

/// Purpose tags for independent random streams.
pub mod stream {
    pub const GRAPH: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const PROBE: u64 = 4;
    pub const MASK: u64 = 5;
    pub const TRIAL: u64 = 6;
    pub const TRAINING: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a stream tag and a counter.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag.wrapping_mul(0xA24B_AED4_963E_E407)) ^ index)
}

pub fn rng_for(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}

pub fn normal_vector<T: Real, R: Rng>(rng: &mut R, n: usize) -> Array1<T> {
    Array1::from_shape_simple_fn(n, || T::c(rng.sample::<f64, _>(StandardNormal)))
}

/// `n × k` standard normal matrix; column `j` is drawn from its own stream
/// `(seed, tag, j)`.
pub fn normal_columns<T: Real>(seed: u64, tag: u64, n: usize, k: usize) -> Array2<T> {
    let mut out = Array2::zeros((n, k));
    for j in 0..k {
        let mut rng = rng_for(seed, tag, j as u64);
        let col = normal_vector::<T, _>(&mut rng, n);
        out.column_mut(j).assign(&col);
    }
    out
}
