//! Chebyshev polynomial approximation of spectral kernels.
//!
//! A kernel on `[0, λ_max]` is expanded as `g(λ) ≈ c₀/2 + Σ_{k≥1} c_k T_k(y)`
//! with `y = 2λ/λ_max − 1`, and applied through the three-term recurrence
//! `T_{k+1}(L̃) = 2 L̃ T_k(L̃) − T_{k−1}(L̃)` on the shifted Laplacian
//! `L̃ = (2/λ_max) L − I`. Only sparse products are needed.

use ndarray::{Array2, ArrayView2, Zip};

use crate::graph::Laplacian;
use crate::scalar::Real;
use crate::spectral::Kernel;

/// Expansion coefficients of `kernel` on `[0, lambda_max]`, from samples at
/// the `order + 1` Chebyshev nodes. Polynomials of degree ≤ `order` are
/// reproduced exactly.
pub fn chebyshev_coefficients<T: Real>(kernel: &Kernel<T>, order: usize, lambda_max: T) -> Vec<T> {
    let n = order + 1;
    let half = lambda_max * T::c(0.5);
    let nf = T::from_usize_lossy(n);
    let samples: Vec<T> = (0..n)
        .map(|j| {
            let theta = T::PI() * (T::from_usize_lossy(j) + T::c(0.5)) / nf;
            kernel.eval_clamped(half * (theta.cos() + T::one()), lambda_max)
        })
        .collect();
    (0..n)
        .map(|k| {
            let kf = T::from_usize_lossy(k);
            let s: T = samples
                .iter()
                .enumerate()
                .map(|(j, &g)| {
                    let theta = T::PI() * (T::from_usize_lossy(j) + T::c(0.5)) / nf;
                    g * (kf * theta).cos()
                })
                .sum();
            T::c(2.0) * s / nf
        })
        .collect()
}

/// Evaluates the truncated expansion at a scalar `lambda`.
pub fn chebyshev_eval<T: Real>(coeffs: &[T], lambda: T, lambda_max: T) -> T {
    let y = if lambda_max > T::zero() { T::c(2.0) * lambda / lambda_max - T::one() } else { -T::one() };
    let mut t_prev = T::one();
    let mut t_cur = y;
    let mut acc = coeffs.first().copied().unwrap_or(T::zero()) * T::c(0.5);
    if coeffs.len() > 1 {
        acc += coeffs[1] * y;
    }
    for &c in coeffs.iter().skip(2) {
        let t_next = T::c(2.0) * y * t_cur - t_prev;
        acc += c * t_next;
        t_prev = t_cur;
        t_cur = t_next;
    }
    acc
}

/// Applies several expansions sharing one recurrence to the block `x`.
/// Returns one `N × K` output per coefficient set.
///
/// The recurrence terms are kept as rows of a `depth × NK` matrix and all
/// outputs are formed by a single dense product with the coefficient table,
/// which is far kinder to the cache than updating every output at each step.
pub fn chebyshev_apply_many<T: Real>(lap: &Laplacian<T>, coeffs: &[Vec<T>], x: ArrayView2<T>) -> Vec<Array2<T>> {
    let (n, k) = x.dim();
    let depth = coeffs.iter().map(Vec::len).max().unwrap_or(0);
    if depth == 0 || n * k == 0 {
        return coeffs.iter().map(|_| Array2::zeros((n, k))).collect();
    }
    let lambda_max = lap.lambda_max();
    let mut table = Array2::<T>::zeros((coeffs.len(), depth));
    for (m, c) in coeffs.iter().enumerate() {
        for (j, &cj) in c.iter().enumerate() {
            table[[m, j]] = if j == 0 { cj * T::c(0.5) } else { cj };
        }
    }

    let mut terms = Array2::<T>::zeros((depth, n * k));
    let flat = |a: ArrayView2<T>| a.as_standard_layout().into_owned().into_shape_with_order(n * k).expect("contiguous");
    terms.row_mut(0).assign(&flat(x));
    if depth > 1 {
        if lambda_max > T::zero() {
            let scale = T::c(2.0) / lambda_max;
            let shifted = |v: ArrayView2<T>| -> Array2<T> {
                let mut lv = lap.apply_mat(v);
                Zip::from(&mut lv).and(&v).for_each(|a, &b| *a = *a * scale - b);
                lv
            };
            let mut t_prev = x.to_owned();
            let mut t_cur = shifted(x);
            terms.row_mut(1).assign(&flat(t_cur.view()));
            for j in 2..depth {
                let mut t_next = shifted(t_cur.view());
                Zip::from(&mut t_next).and(&t_prev).for_each(|a, &b| *a = T::c(2.0) * *a - b);
                terms.row_mut(j).assign(&flat(t_next.view()));
                t_prev = t_cur;
                t_cur = t_next;
            }
        } else {
            // L = 0, so L̃ = −I and T_j(L̃) = (−1)^j I.
            for j in 1..depth {
                let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                let row = terms.row(0).mapv(|v| v * sign);
                terms.row_mut(j).assign(&row);
            }
        }
    }
    table
        .dot(&terms)
        .outer_iter()
        .map(|row| row.to_owned().into_shape_with_order((n, k)).expect("n × k"))
        .collect()
}
