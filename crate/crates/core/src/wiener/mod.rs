//! Wiener filtering and optimisation, the closed-form LMMSE oracle, and the
//! constrained Tikhonov / total-variation baselines.

mod convex;
mod fista;
mod lmmse;
mod operator;

pub use convex::{epsilon_rule, tikhonov_solve, tv_solve, tv_solve_with, TikhonovOutcome, TvOptions, TvOutcome};
pub use fista::{wiener_optimize, FistaOptions, FistaOutcome};
pub use lmmse::{lmmse_closed_form, lmmse_with_covariance, wiener_interpolate_noiseless};
pub use operator::{LinearOperator, Mask, Operator};

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{FilterEngine, Kernel};

/// Prior mean of the signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Mean<T> {
    Scalar(T),
    Vector(Array1<T>),
}

impl<T: Real> Mean<T> {
    pub fn zero() -> Self {
        Mean::Scalar(T::zero())
    }

    pub fn to_vector(&self, n: usize) -> Result<Array1<T>> {
        match self {
            Mean::Scalar(c) => Ok(Array1::from_elem(n, *c)),
            Mean::Vector(v) if v.len() == n => Ok(v.clone()),
            Mean::Vector(v) => Err(Error::DimensionMismatch { expected: n, got: v.len() }),
        }
    }
}

impl<T: Real> Default for Mean<T> {
    fn default() -> Self {
        Self::zero()
    }
}

/// Observation model `y = Hx + w` together with the second-order prior of `x`.
#[derive(Debug, Clone)]
pub struct WienerProblem<T> {
    pub operator: Operator<T>,
    /// Signal PSD `s²(λ)`.
    pub psd: Kernel<T>,
    /// Noise PSD `n(λ)`; a constant `σ²` for i.i.d. noise.
    pub noise: Kernel<T>,
    pub mean: Mean<T>,
    pub y: Array1<T>,
}

impl<T: Real> WienerProblem<T> {
    /// Problem with i.i.d. noise of variance `sigma2` and zero mean.
    pub fn new(operator: Operator<T>, psd: Kernel<T>, sigma2: T, y: Array1<T>) -> Self {
        Self { operator, psd, noise: Kernel::constant(sigma2), mean: Mean::zero(), y }
    }

    pub fn with_mean(mut self, mean: Mean<T>) -> Self {
        self.mean = mean;
        self
    }

    pub fn n(&self) -> usize {
        self.operator.cols()
    }

    pub fn mean_vector(&self) -> Result<Array1<T>> {
        self.mean.to_vector(self.n())
    }

    /// Checks dimensions and that `s²` and `n` are non-negative on the spectrum
    /// seen by `engine`.
    pub fn validate(&self, engine: &FilterEngine<T>) -> Result<()> {
        if engine.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: engine.n(), got: self.n() });
        }
        if self.y.len() != self.operator.rows() {
            return Err(Error::DimensionMismatch { expected: self.operator.rows(), got: self.y.len() });
        }
        self.mean_vector()?;
        let lambda_max = engine.lambda_max();
        let tol = T::c(-1e-12);
        let check = |k: &Kernel<T>, what: &str| -> Result<()> {
            let bad = match engine.basis() {
                Some(b) => b.kernel_values(k).iter().any(|&v| !(v >= tol)),
                None => (0..=200).any(|i| {
                    let l = lambda_max * T::from_usize_lossy(i) / T::c(200.0);
                    !(k.eval_clamped(l, lambda_max) >= tol)
                }),
            };
            if bad {
                Err(Error::InvalidKernel(format!("{what} must be non-negative and finite on [0, λmax]")))
            } else {
                Ok(())
            }
        };
        check(&self.psd, "signal PSD")?;
        check(&self.noise, "noise PSD")
    }
}

/// `g = h s² / (h² s² + n)`, with `0/0 = 0`.
pub fn wiener_kernel<T: Real>(h: &Kernel<T>, s2: &Kernel<T>, n: &Kernel<T>) -> Kernel<T> {
    let (h, s2, n) = (h.clone(), s2.clone(), n.clone());
    Kernel::from_fn(move |l| {
        let hv = h.eval(l);
        let s = s2.eval_psd(l);
        let den = hv * hv * s + n.eval_psd(l);
        if den > T::zero() {
            hv * s / den
        } else {
            T::zero()
        }
    })
}

/// Wiener estimate for a filter degradation `H = h(L)`:
/// `x̄ = m + g(L)(y − h(L) m)`.
pub fn wiener_filter<T: Real>(engine: &FilterEngine<T>, problem: &WienerProblem<T>) -> Result<Array1<T>> {
    let h = problem.operator.filter_kernel().ok_or(Error::OperatorNotAFilter)?;
    problem.validate(engine)?;
    let g = wiener_kernel(&h, &problem.psd, &problem.noise);
    let m = problem.mean_vector()?;
    let resid = &problem.y - &problem.operator.apply(m.view());
    Ok(m + engine.apply_vec(&g, resid.view())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, random_geometric_graph};
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wiener_kernel_examples() {
        let h = Kernel::heat(0.5);
        let s2 = Kernel::constant(2.0);
        let g = wiener_kernel(&h, &s2, &Kernel::constant(0.0));
        for l in [0.0, 0.7, 3.0] {
            assert_abs_diff_eq!(g.eval(l), 1.0 / h.eval(l), epsilon = 1e-12);
        }
        let s2 = Kernel::heat(1.0);
        let half = wiener_kernel(&Kernel::constant(1.0), &s2, &s2);
        assert_abs_diff_eq!(half.eval(1.3), 0.5, epsilon = 1e-15);
        let g = wiener_kernel(&Kernel::constant(1.0), &s2, &Kernel::constant(0.1));
        assert_abs_diff_eq!(g.eval(0.0), 1.0 / 1.1, epsilon = 1e-15);
        let zero = wiener_kernel(&Kernel::constant(1.0), &Kernel::constant(0.0), &Kernel::constant(0.0));
        assert_eq!(zero.eval(0.3), 0.0);
    }

    #[test]
    fn wiener_filter_inverts_noiseless_filter() {
        let lap = laplacian(&random_geometric_graph::<f64>(60, 6, 2).unwrap());
        let basis = eigendecompose(&lap).unwrap();
        let engine = FilterEngine::exact(basis);
        let h = Kernel::heat(0.3);
        let op = Operator::filter(engine.clone(), h);
        let x = Array1::from_shape_fn(60, |i| (i as f64 * 0.37).sin());
        let y = op.apply(x.view());
        let p = WienerProblem::new(op.clone(), Kernel::constant(1.0), 0.0, y.clone());
        let xb = wiener_filter(&engine, &p).unwrap();
        assert!((&xb - &x).iter().all(|v| v.abs() < 1e-8));

        let ident = WienerProblem::new(Operator::identity(60), Kernel::heat(1.0), 0.0, x.clone());
        let xb = wiener_filter(&engine, &ident).unwrap();
        assert!((&xb - &x).iter().all(|v| v.abs() < 1e-12));

        let loud = WienerProblem::new(op, Kernel::heat(1.0), 1e12, y).with_mean(Mean::Scalar(3.0));
        let xb = wiener_filter(&engine, &loud).unwrap();
        assert!(xb.iter().all(|v| (v - 3.0).abs() < 1e-6));
    }

    #[test]
    fn mask_is_not_a_filter() {
        let lap = laplacian(&random_geometric_graph::<f64>(20, 4, 1).unwrap());
        let engine = FilterEngine::chebyshev(lap, 20);
        let p = WienerProblem::new(
            Operator::mask(Mask::new(20, vec![0, 1]).unwrap()),
            Kernel::constant(1.0),
            0.1,
            Array1::zeros(2),
        );
        assert_eq!(wiener_filter(&engine, &p).unwrap_err(), Error::OperatorNotAFilter);
    }

    #[test]
    fn validation_rejects_negative_psd_and_bad_shapes() {
        let lap = laplacian(&random_geometric_graph::<f64>(20, 4, 1).unwrap());
        let engine = FilterEngine::chebyshev(lap, 20);
        let p = WienerProblem::new(Operator::identity(20), Kernel::constant(-1.0), 0.1, Array1::zeros(20));
        assert!(matches!(p.validate(&engine), Err(Error::InvalidKernel(_))));
        let p = WienerProblem::new(Operator::identity(20), Kernel::constant(1.0), 0.1, Array1::zeros(19));
        assert!(matches!(p.validate(&engine), Err(Error::DimensionMismatch { .. })));
    }
}
