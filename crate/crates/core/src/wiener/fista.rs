use ndarray::{Array1, Axis};

use super::{LinearOperator, WienerProblem};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{FilterEngine, Kernel};

/// Parameters of the accelerated forward-backward solver.
#[derive(Debug, Clone)]
pub struct FistaOptions<T> {
    /// Step size; `None` selects `1 / (2‖H‖²)`.
    pub beta: Option<T>,
    /// Stopping tolerance on `‖z_{j+1} − z_j‖² / (‖z_j‖² + δ)`.
    pub eps: T,
    pub max_iter: usize,
    pub delta: T,
    /// Starting point; the prior mean when `None`.
    pub x0: Option<Array1<T>>,
}

impl<T: Real> Default for FistaOptions<T> {
    fn default() -> Self {
        Self { beta: None, eps: T::c(1e-8), max_iter: 2000, delta: T::c(1e-12), x0: None }
    }
}

#[derive(Debug, Clone)]
pub struct FistaOutcome<T> {
    pub x: Array1<T>,
    /// Objective `‖Hx − y‖² + ‖w(L)(x − m)‖²` after every iteration.
    pub objective: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min ‖Hx − y‖² + ‖w(L)(x − m)‖²` with `w² = n / s²` by FISTA.
///
/// The proximal step is the Wiener denoiser `s² / (s² + βn)`, so `w` itself
/// is never formed and zeros of `s²` are harmless. Momentum is restarted
/// adaptively and uphill steps are rejected, so the recorded objective never
/// increases. Hitting `max_iter` is not an error: the last iterate is
/// returned with `converged = false`.
pub fn wiener_optimize<T: Real>(
    engine: &FilterEngine<T>,
    problem: &WienerProblem<T>,
    opts: &FistaOptions<T>,
) -> Result<FistaOutcome<T>> {
    problem.validate(engine)?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let op = &problem.operator;
    let norm = op.norm_bound();
    let bound = if norm > T::zero() { T::one() / (T::c(2.0) * norm * norm) } else { T::infinity() };
    let beta = match opts.beta {
        Some(b) if b > T::zero() && b <= bound * T::c(1.0 + 1e-12) => b,
        Some(b) => return Err(Error::InvalidParameter(format!("beta = {b} must lie in (0, 1/(2‖H‖²)]"))),
        None if bound.is_finite() => bound,
        None => T::one(),
    };

    let (prox, weight) = prox_kernels(&problem.psd, &problem.noise, beta);
    let bank = [prox, weight];
    let m = problem.mean_vector()?;
    let y = &problem.y;

    let mut u = match &opts.x0 {
        Some(x0) if x0.len() == m.len() => x0.clone(),
        Some(x0) => return Err(Error::DimensionMismatch { expected: m.len(), got: x0.len() }),
        None => m.clone(),
    };
    let mut hu = op.apply(u.view());
    let mut z = u.clone();
    let mut hz = hu.clone();
    let mut t = T::one();
    let mut objective = Vec::new();
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let grad = op.adjoint((&hz - y).view());
        let d = &z - &(grad * beta) - &m;
        let mut out = engine.apply_bank(&bank, d.insert_axis(Axis(1)).view())?.into_iter();
        let gd = out.next().expect("two kernels").index_axis_move(Axis(1), 0);
        let wd = out.next().expect("two kernels").index_axis_move(Axis(1), 0);

        let u_next = &m + &gd;
        let hu_next = op.apply(u_next.view());
        let f = sq_norm(&(&hu_next - y)) + sq_norm(&wd);
        if !f.is_finite() || u_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        // A step that raises the objective is rejected and the momentum is
        // reset, so the next step is a plain forward-backward step from the
        // last accepted point. Those never increase the objective, which
        // keeps the trace non-increasing.
        // Increases at round-off level are not treated as uphill.
        let previous = objective.last().copied();
        if previous.is_some_and(|p: T| f > p + p.abs() * T::epsilon() * T::c(16.0)) {
            objective.push(previous.expect("checked"));
            let rel = sq_norm(&(&u - &z)) / (sq_norm(&z) + opts.delta);
            z = u.clone();
            hz = hu.clone();
            t = T::one();
            if rel < opts.eps {
                converged = true;
                break;
            }
            continue;
        }
        objective.push(f);

        // Momentum is also dropped whenever it points uphill, i.e. when the
        // prox step moved against the previous update. Plain FISTA ripples
        // around the minimiser and the step-size test can then fire at a
        // turning point well short of it.
        if (&z - &u_next).dot(&(&u_next - &u)) > T::zero() {
            t = T::one();
        }
        let t_next = (T::one() + (T::one() + T::c(4.0) * t * t).sqrt()) / T::c(2.0);
        let c = (t - T::one()) / t_next;
        let z_next = &u_next + &((&u_next - &u) * c);
        hz = &hu_next + &((&hu_next - &hu) * c);
        let rel = sq_norm(&(&z_next - &z)) / (sq_norm(&z) + opts.delta);

        u = u_next;
        hu = hu_next;
        z = z_next;
        t = t_next;
        if rel < opts.eps {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("wiener_optimize stopped after {} iterations without reaching tolerance", opts.max_iter);
    }
    Ok(FistaOutcome { iterations: objective.len(), x: u, objective, converged })
}

/// Proximal kernel `s² / (s² + βn)` and the square root of the penalty weight
/// seen through it, `√(n s²) / (s² + βn)`, so that
/// `‖w(L)(u − m)‖ = ‖weight(L)(v − m)‖` when `u − m = prox(L)(v − m)`.
fn prox_kernels<T: Real>(s2: &Kernel<T>, n: &Kernel<T>, beta: T) -> (Kernel<T>, Kernel<T>) {
    let (a, b) = (s2.clone(), n.clone());
    let prox = Kernel::from_fn(move |l| {
        let s = a.eval_psd(l);
        let den = s + beta * b.eval_psd(l);
        if den > T::zero() {
            s / den
        } else {
            T::zero()
        }
    });
    let (a, b) = (s2.clone(), n.clone());
    let weight = Kernel::from_fn(move |l| {
        let s = a.eval_psd(l);
        let nv = b.eval_psd(l);
        let den = s + beta * nv;
        if den > T::zero() {
            (nv * s).sqrt() / den
        } else {
            T::zero()
        }
    });
    (prox, weight)
}

fn sq_norm<T: Real>(x: &Array1<T>) -> T {
    x.dot(x)
}
