use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{LinearOperator, Mean, WienerProblem};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, symmetric_pinv};
use crate::scalar::Real;
use crate::spectral::{Kernel, SpectralBasis};

/// Dense LMMSE estimate from an explicit prior covariance:
/// `x̄ = m + Σ Hᵀ (H Σ Hᵀ + σ² I)⁻¹ (y − H m)`.
pub fn lmmse_with_covariance<T: Real>(
    cov: ArrayView2<T>,
    h: ArrayView2<T>,
    y: ArrayView1<T>,
    sigma2: T,
    mean: &Mean<T>,
) -> Result<Array1<T>> {
    let n = cov.nrows();
    if cov.ncols() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    if y.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: y.len() });
    }
    let m = mean.to_vector(n)?;
    let sxy = cov.dot(&h.t());
    let mut sy = h.dot(&sxy);
    for i in 0..sy.nrows() {
        sy[[i, i]] += sigma2;
    }
    let l = cholesky(sy.view())?;
    let r = &y - &h.dot(&m);
    Ok(m + sxy.dot(&cholesky_solve(l.view(), r.view())))
}

/// Closed-form LMMSE estimate for i.i.d. noise of variance `sigma2` and prior
/// covariance `s²(L)`, evaluated with dense linear algebra.
pub fn lmmse_closed_form<T: Real>(basis: &SpectralBasis<T>, problem: &WienerProblem<T>, sigma2: T) -> Result<Array1<T>> {
    check(basis, problem)?;
    let cov = basis.kernel_matrix(&psd_clamped(&problem.psd));
    let h = problem.operator.to_dense();
    lmmse_with_covariance(cov.view(), h.view(), problem.y.view(), sigma2, &problem.mean)
}

/// Minimiser of `‖s⁻¹(L)(x − m)‖` subject to `Hx = y`:
/// `x̄ = m + s²Hᵀ (H s² Hᵀ)⁺ (y − H m)`.
///
/// The pseudo-inverse lets band-limited priors work as long as the samples
/// determine the signal; if the constraint cannot be met the system is
/// reported as singular.
pub fn wiener_interpolate_noiseless<T: Real>(basis: &SpectralBasis<T>, problem: &WienerProblem<T>) -> Result<Array1<T>> {
    check(basis, problem)?;
    let cov = basis.kernel_matrix(&psd_clamped(&problem.psd));
    let h = problem.operator.to_dense();
    let m = problem.mean_vector()?;
    let sxy = cov.dot(&h.t());
    let sy = h.dot(&sxy);
    let pinv = symmetric_pinv(sy.view(), T::c(1e-12))?;
    let r = &problem.y - &h.dot(&m);
    let x = m + sxy.dot(&pinv.dot(&r));
    let resid = &h.dot(&x) - &problem.y;
    let scale = T::one() + problem.y.dot(&problem.y).sqrt();
    if resid.dot(&resid).sqrt() > T::c(1e-8) * scale {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

fn check<T: Real>(basis: &SpectralBasis<T>, problem: &WienerProblem<T>) -> Result<()> {
    if problem.n() != basis.n() {
        return Err(Error::DimensionMismatch { expected: basis.n(), got: problem.n() });
    }
    if problem.y.len() != problem.operator.rows() {
        return Err(Error::DimensionMismatch { expected: problem.operator.rows(), got: problem.y.len() });
    }
    Ok(())
}

fn psd_clamped<T: Real>(k: &Kernel<T>) -> Kernel<T> {
    let k = k.clone();
    Kernel::from_fn(move |l| k.eval_psd(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, random_geometric_graph, Graph};
    use crate::spectral::eigendecompose;
    use crate::wiener::{Mask, Operator};

    fn path(n: usize) -> SpectralBasis<f64> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        eigendecompose(&laplacian(&Graph::from_edge_list(n, &edges).unwrap())).unwrap()
    }

    #[test]
    fn identity_noiseless_returns_y() {
        let b = path(8);
        let y = Array1::from_shape_fn(8, |i| i as f64 * 0.5 - 1.0);
        let p = WienerProblem::new(Operator::identity(8), Kernel::heat(0.3), 0.0, y.clone());
        let x = lmmse_closed_form(&b, &p, 0.0).unwrap();
        assert!((&x - &y).iter().all(|v| v.abs() < 1e-9));
        let x = wiener_interpolate_noiseless(&b, &p).unwrap();
        assert!((&x - &y).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn observing_the_mean_returns_the_mean() {
        let b = path(10);
        let mask = Mask::new(10, vec![1, 4, 6]).unwrap();
        let mean = Array1::from_shape_fn(10, |i| i as f64);
        let y = mask.select(mean.view());
        let p = WienerProblem::new(Operator::mask(mask), Kernel::heat(1.0), 0.3, y).with_mean(Mean::Vector(mean.clone()));
        let x = lmmse_closed_form(&b, &p, 0.3).unwrap();
        assert!((&x - &mean).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn path_graph_fixture() {
        // Independent evaluation through the Gaussian conditional written with
        // the precision matrix: x̄ = (Σ⁻¹ + HᵀH/σ²)⁻¹ Hᵀy/σ².
        let b = path(10);
        let s2 = Kernel::heat(2.0);
        let mask = Mask::new(10, vec![0, 2, 5, 7, 9]).unwrap();
        let y = Array1::from(vec![1.0, 0.5, -0.2, 0.3, 0.8]);
        let p = WienerProblem::new(Operator::mask(mask.clone()), s2.clone(), 0.01, y.clone());
        let x = lmmse_closed_form(&b, &p, 0.01).unwrap();

        let prec = b.kernel_matrix(&Kernel::heat(-2.0));
        let mut a = prec.clone();
        for &i in mask.indices() {
            a[[i, i]] += 100.0;
        }
        let rhs = mask.scatter(y.view()) * 100.0;
        let oracle = crate::linalg::solve_spd(a.view(), rhs.view()).unwrap();
        assert!((&x - &oracle).iter().all(|v| v.abs() < 1e-9), "{x} vs {oracle}");
    }

    #[test]
    fn noiseless_interpolation_meets_constraint_and_recovers_bandlimited() {
        let lap = laplacian(&random_geometric_graph::<f64>(50, 6, 9).unwrap());
        let b = eigendecompose(&lap).unwrap();
        let mask = Mask::new(50, (0..50).filter(|i| i % 5 != 0).collect()).unwrap();
        let full = Operator::mask(mask.clone());
        let y = Array1::from_shape_fn(mask.len(), |i| (i as f64 * 0.4).cos());
        let p = WienerProblem::new(full.clone(), Kernel::heat(0.5), 0.0, y.clone());
        let x = wiener_interpolate_noiseless(&b, &p).unwrap();
        assert!((&mask.select(x.view()) - &y).iter().all(|v| v.abs() < 1e-10));

        // A signal living on the first 8 eigenvectors is determined by 40 samples.
        let coeffs = Array1::from_shape_fn(50, |l| if l < 8 { 1.0 / (1.0 + l as f64) } else { 0.0 });
        let x_true = b.igft(coeffs.view()).unwrap();
        let cut = 0.5 * (b.lambdas()[7] + b.lambdas()[8]);
        let p = WienerProblem::new(full, Kernel::Bandlimit { lambda_c: cut }, 0.0, mask.select(x_true.view()));
        let x = wiener_interpolate_noiseless(&b, &p).unwrap();
        assert!((&x - &x_true).iter().all(|v| v.abs() < 1e-8));
    }
}
