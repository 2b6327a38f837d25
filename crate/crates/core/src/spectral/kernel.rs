//! Spectral kernels: real functions of the Laplacian eigenvalues.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Opaque kernel backed by a closure. Not serialisable.
#[derive(Clone)]
pub struct FnKernel<T>(Arc<dyn Fn(T) -> T + Send + Sync>);

impl<T> fmt::Debug for FnKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnKernel(..)")
    }
}

/// A spectral kernel `g(λ)`.
///
/// The serialised form is tagged by `type`, e.g. `{"type":"heat","tau":2.0}`
/// or `{"type":"sampled","knots":[[0.0,1.0],[2.0,0.5]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Real")]
pub enum Kernel<T> {
    /// `exp(-τ λ)`
    Heat { tau: T },
    /// `exp(-(λ - μ)² / σ²)`
    Gaussian { mu: T, sigma2: T },
    /// `1 / (λ + δ)`
    InverseLambda { delta: T },
    /// `1` for `λ ≤ λ_c`, `0` above.
    Bandlimit { lambda_c: T },
    Constant { value: T },
    /// `Σ_k c_k λ^k`
    Polynomial { coeffs: Vec<T> },
    /// `1` up to `pass`, raised-cosine roll-off to `0` at `stop`.
    RaisedCosine { pass: T, stop: T },
    /// Linear interpolation between knots, clamped to the end values.
    Sampled { knots: Vec<[T; 2]> },
    #[serde(skip)]
    Func(FnKernel<T>),
}

impl<T: Real> Kernel<T> {
    pub fn heat(tau: T) -> Self {
        Kernel::Heat { tau }
    }

    pub fn gaussian(mu: T, sigma2: T) -> Self {
        Kernel::Gaussian { mu, sigma2 }
    }

    pub fn constant(value: T) -> Self {
        Kernel::Constant { value }
    }

    pub fn polynomial(coeffs: Vec<T>) -> Self {
        Kernel::Polynomial { coeffs }
    }

    pub fn from_fn(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Kernel::Func(FnKernel(Arc::new(f)))
    }

    /// Piecewise-linear kernel; abscissae must be finite and strictly increasing.
    pub fn sampled(knots: Vec<[T; 2]>) -> Result<Self> {
        let k = Kernel::Sampled { knots };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidKernel(msg.to_string()));
        match self {
            Kernel::Gaussian { sigma2, .. } if !(*sigma2 > T::zero()) => bad("gaussian sigma2 must be positive"),
            Kernel::InverseLambda { delta } if !(*delta > T::zero()) => bad("inverse_lambda delta must be positive"),
            Kernel::RaisedCosine { pass, stop } if !(*stop > *pass) => bad("raised_cosine needs stop > pass"),
            Kernel::Sampled { knots } => {
                if knots.is_empty() {
                    return bad("sampled kernel needs at least one knot");
                }
                if knots.iter().any(|k| !k[0].is_finite() || !k[1].is_finite()) {
                    return bad("sampled kernel knots must be finite");
                }
                if knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return bad("sampled kernel abscissae must be strictly increasing");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the kernel at `lambda`.
    pub fn eval(&self, lambda: T) -> T {
        match self {
            Kernel::Heat { tau } => (-*tau * lambda).exp(),
            Kernel::Gaussian { mu, sigma2 } => (-(lambda - *mu).powi(2) / *sigma2).exp(),
            Kernel::InverseLambda { delta } => T::one() / (lambda + *delta),
            Kernel::Bandlimit { lambda_c } => {
                if lambda <= *lambda_c {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Kernel::Constant { value } => *value,
            Kernel::Polynomial { coeffs } => coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * lambda + c),
            Kernel::RaisedCosine { pass, stop } => {
                if lambda <= *pass {
                    T::one()
                } else if lambda >= *stop {
                    T::zero()
                } else {
                    let t = (lambda - *pass) / (*stop - *pass);
                    T::c(0.5) * (T::one() + (T::PI() * t).cos())
                }
            }
            Kernel::Sampled { knots } => interpolate(knots, lambda),
            Kernel::Func(FnKernel(f)) => f(lambda),
        }
    }

    /// Evaluates with the argument clamped into `[0, lambda_max]`.
    pub fn eval_clamped(&self, lambda: T, lambda_max: T) -> T {
        self.eval(lambda.max(T::zero()).min(lambda_max))
    }

    /// Evaluation for power-spectral-density kernels: negative values read as 0.
    pub fn eval_psd(&self, lambda: T) -> T {
        self.eval(lambda).max(T::zero())
    }

    /// Pointwise product `self(λ) · other(λ)`.
    pub fn product(&self, other: &Kernel<T>) -> Kernel<T> {
        let (a, b) = (self.clone(), other.clone());
        Kernel::from_fn(move |l| a.eval(l) * b.eval(l))
    }

    /// Pointwise map `f(self(λ))`.
    pub fn map(&self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Kernel<T> {
        let a = self.clone();
        Kernel::from_fn(move |l| f(a.eval(l)))
    }

    /// Returns the constant value when the kernel is `Constant`.
    pub fn as_constant(&self) -> Option<T> {
        match self {
            Kernel::Constant { value } => Some(*value),
            _ => None,
        }
    }
}

fn interpolate<T: Real>(knots: &[[T; 2]], x: T) -> T {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let hi = knots.partition_point(|k| k[0] <= x);
    let (a, b) = (knots[hi - 1], knots[hi]);
    if x == a[0] {
        return a[1];
    }
    let t = (x - a[0]) / (b[0] - a[0]);
    a[1] + t * (b[1] - a[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_kernels() {
        assert_eq!(Kernel::heat(2.0).eval(0.0), 1.0);
        assert!((Kernel::heat(2.0).eval(1.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(Kernel::gaussian(1.0, 0.5).eval(1.0), 1.0);
        assert_eq!(Kernel::InverseLambda { delta: 0.5 }.eval(1.5), 0.5);
        assert_eq!(Kernel::Bandlimit { lambda_c: 1.0 }.eval(1.0), 1.0);
        assert_eq!(Kernel::Bandlimit { lambda_c: 1.0 }.eval(1.1), 0.0);
        assert_eq!(Kernel::polynomial(vec![1.0, -2.0, 3.0]).eval(2.0), 1.0 - 4.0 + 12.0);
        let rc = Kernel::RaisedCosine { pass: 1.0f64, stop: 3.0 };
        assert_eq!(rc.eval(0.5), 1.0);
        assert!((rc.eval(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(rc.eval(3.5), 0.0);
    }

    #[test]
    fn sampled_interpolation_and_clamp() {
        let k = Kernel::sampled(vec![[1.0, 0.0], [2.0, 2.0]]).unwrap();
        assert_eq!(k.eval(1.5), 1.0);
        assert_eq!(k.eval(0.0), 0.0);
        assert_eq!(k.eval(5.0), 2.0);
        assert_eq!(k.eval(2.0), 2.0);
        let single = Kernel::sampled(vec![[0.3, 4.0]]).unwrap();
        assert_eq!(single.eval(0.0), 4.0);
        assert_eq!(single.eval(9.0), 4.0);
    }

    #[test]
    fn sampled_validation() {
        assert!(Kernel::<f64>::sampled(vec![]).is_err());
        assert!(Kernel::sampled(vec![[1.0, 0.0], [1.0, 2.0]]).is_err());
        assert!(Kernel::sampled(vec![[2.0, 0.0], [1.0, 2.0]]).is_err());
    }

    #[test]
    fn clamped_evaluation() {
        let k = Kernel::polynomial(vec![0.0, 1.0]);
        assert_eq!(k.eval_clamped(-1.0, 4.0), 0.0);
        assert_eq!(k.eval_clamped(6.0, 4.0), 4.0);
        assert_eq!(Kernel::constant(-1.0).eval_psd(0.0), 0.0);
    }

    #[test]
    fn json_forms() {
        let k: Kernel<f64> = serde_json::from_str(r#"{"type":"heat","tau":0.5}"#).unwrap();
        assert!(matches!(k, Kernel::Heat { tau } if tau == 0.5));
        let k: Kernel<f64> = serde_json::from_str(r#"{"type":"gaussian","mu":1,"sigma2":2}"#).unwrap();
        assert!(matches!(k, Kernel::Gaussian { .. }));
        let k: Kernel<f64> = serde_json::from_str(r#"{"type":"sampled","knots":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(k.eval(0.5), 0.5);
        let s = serde_json::to_string(&Kernel::constant(2.0)).unwrap();
        assert_eq!(s, r#"{"type":"constant","value":2.0}"#);
        assert!(serde_json::to_string(&Kernel::from_fn(|x: f64| x)).is_err());
    }
}
