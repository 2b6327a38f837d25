//! Constrained smoothness baselines:
//! `min xᵀLx` and `min ‖∇x‖₁`, both subject to `‖Hx − y‖ ≤ ε`.

use ndarray::{Array1, ArrayView1};

use super::{LinearOperator, Operator};
use crate::error::{Error, Result};
use crate::graph::{GradientOperator, Laplacian};
use crate::linalg::conjugate_gradient;
use crate::scalar::Real;
use crate::spectral::{FilterEngine, SpectralBasis};

/// The usual noise-matched radius `σ √m`.
pub fn epsilon_rule<T: Real>(sigma: T, m: usize) -> T {
    sigma * T::from_usize_lossy(m).sqrt()
}

#[derive(Debug, Clone)]
pub struct TikhonovOutcome<T> {
    pub x: Array1<T>,
    /// Lagrange weight of the returned point; `None` when the constant fit is
    /// already feasible or the constraint is an equality.
    pub gamma: Option<T>,
    pub residual: T,
    pub steps: usize,
}

const BISECTION_TOL: f64 = 1e-3;
const MAX_BISECTION: usize = 200;

/// Solves `min xᵀLx` s.t. `‖Hx − y‖ ≤ ε` by bisection on the Lagrange weight
/// `γ` of `(HᵀH + γL) x = Hᵀy`.
///
/// The returned point is always feasible. Bisection stops once the residual
/// lies in `[(1 − 10⁻³) ε, ε]`.
pub fn tikhonov_solve<T: Real>(lap: &Laplacian<T>, op: &Operator<T>, y: ArrayView1<T>, eps: T) -> Result<TikhonovOutcome<T>> {
    check_shapes(lap.n(), op, y)?;
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {eps}")));
    }
    let n = lap.n();
    let residual = |x: &Array1<T>| norm(&(&op.apply(x.view()) - &y));

    // Constant vectors have zero energy, so a feasible constant is optimal.
    let h1 = op.apply(Array1::ones(n).view());
    let hh = h1.dot(&h1);
    if hh > T::zero() {
        let c = h1.dot(&y) / hh;
        let x = Array1::from_elem(n, c);
        let r = residual(&x);
        if r <= eps {
            return Ok(TikhonovOutcome { x, gamma: None, residual: r, steps: 0 });
        }
    }

    if eps == T::zero() {
        let (x, r) = exact_fit(lap, op, y)?;
        if r > T::c(1e-9) * (T::one() + norm(&y.to_owned())) {
            return Err(Error::Infeasible { min_residual: r.to_f64_lossy(), epsilon: 0.0 });
        }
        return Ok(TikhonovOutcome { x, gamma: None, residual: r, steps: 0 });
    }

    let solver = RidgeSolver::new(lap, op, y);
    let norm_h = op.norm_bound();
    let mut gamma_hi = (norm_h * norm_h / lap.lambda_max().max(T::min_positive_value())).max(T::c(1e-300));
    let mut x_hi = solver.solve(gamma_hi, None);
    let mut steps = 1;
    while residual(&x_hi) <= eps {
        gamma_hi *= T::c(10.0);
        x_hi = solver.solve(gamma_hi, Some(&x_hi));
        steps += 1;
        if steps > 60 {
            break;
        }
    }
    let mut gamma_lo = gamma_hi / T::c(10.0);
    let mut x_lo = solver.solve(gamma_lo, Some(&x_hi));
    let floor = gamma_hi * T::c(1e-24);
    while residual(&x_lo) > eps {
        if gamma_lo < floor {
            return Err(Error::Infeasible { min_residual: residual(&x_lo).to_f64_lossy(), epsilon: eps.to_f64_lossy() });
        }
        gamma_hi = gamma_lo;
        gamma_lo /= T::c(10.0);
        x_lo = solver.solve(gamma_lo, Some(&x_lo));
        steps += 1;
    }

    let lower = eps * T::c(1.0 - BISECTION_TOL);
    let mut r_lo = residual(&x_lo);
    for _ in 0..MAX_BISECTION {
        if r_lo >= lower {
            break;
        }
        let mid = (gamma_lo * gamma_hi).sqrt();
        if !(mid > gamma_lo && mid < gamma_hi) {
            break;
        }
        let x = solver.solve(mid, Some(&x_lo));
        steps += 1;
        let r = residual(&x);
        if r <= eps {
            gamma_lo = mid;
            x_lo = x;
            r_lo = r;
        } else {
            gamma_hi = mid;
        }
    }
    Ok(TikhonovOutcome { x: x_lo, gamma: Some(gamma_lo), residual: r_lo, steps })
}

/// Solves `(HᵀH + γL) x = Hᵀy`, diagonally in the Fourier basis when `H` is
/// an exactly-applied filter and by conjugate gradients otherwise.
enum RidgeSolver<'a, T: Real> {
    Spectral { basis: &'a SpectralBasis<T>, h: Array1<T>, yhat: Array1<T> },
    Iterative { lap: &'a Laplacian<T>, op: &'a Operator<T>, rhs: Array1<T> },
}

impl<'a, T: Real> RidgeSolver<'a, T> {
    fn new(lap: &'a Laplacian<T>, op: &'a Operator<T>, y: ArrayView1<'a, T>) -> Self {
        if let Operator::Filter { engine: FilterEngine::Exact(basis), kernel, .. } = op {
            let yhat = basis.gft(y).expect("shape checked");
            return RidgeSolver::Spectral { basis, h: basis.kernel_values(kernel), yhat };
        }
        RidgeSolver::Iterative { lap, op, rhs: op.adjoint(y) }
    }

    fn solve(&self, gamma: T, warm: Option<&Array1<T>>) -> Array1<T> {
        match self {
            RidgeSolver::Spectral { basis, h, yhat } => {
                let lambdas = basis.lambdas();
                let xhat = Array1::from_shape_fn(h.len(), |l| {
                    let den = h[l] * h[l] + gamma * lambdas[l];
                    if den > T::zero() {
                        h[l] * yhat[l] / den
                    } else {
                        T::zero()
                    }
                });
                basis.igft(xhat.view()).expect("shape checked")
            }
            RidgeSolver::Iterative { lap, op, rhs } => {
                let apply = |v: ArrayView1<T>| {
                    let mut out = op.adjoint(op.apply(v).view());
                    out.scaled_add(gamma, &lap.apply(v));
                    out
                };
                let max_iter = 20 * lap.n() + 100;
                conjugate_gradient(apply, rhs.view(), warm.map(|w| w.view()), cg_tol::<T>(), max_iter).x
            }
        }
    }
}

fn cg_tol<T: Real>() -> T {
    (T::epsilon() * T::c(100.0)).max(T::c(1e-12))
}

/// Minimum-energy exact fit `min xᵀLx` s.t. `Hx = y` when cheaply available,
/// else the least-squares point reached by conjugate gradients.
fn exact_fit<T: Real>(lap: &Laplacian<T>, op: &Operator<T>, y: ArrayView1<T>) -> Result<(Array1<T>, T)> {
    let x = match op {
        Operator::Identity(_) => y.to_owned(),
        Operator::Mask(mask) => {
            // Harmonic extension: L_uu x_u = −L_uo y.
            let observed = mask.scatter(y);
            let indicator = mask.indicator::<T>();
            let free = indicator.mapv(|v| T::one() - v);
            if free.iter().all(|&v| v == T::zero()) {
                observed
            } else {
                let rhs = -(lap.apply(observed.view())) * &free;
                let apply = |v: ArrayView1<T>| lap.apply((&v * &free).view()) * &free + &v * &indicator;
                let sol = conjugate_gradient(apply, rhs.view(), None, cg_tol::<T>(), 20 * lap.n() + 100).x;
                &sol * &free + &observed
            }
        }
        _ => least_squares_point(op, y),
    };
    let r = norm(&(&op.apply(x.view()) - &y));
    Ok((x, r))
}

/// A point minimising `‖Hx − y‖`.
fn least_squares_point<T: Real>(op: &Operator<T>, y: ArrayView1<T>) -> Array1<T> {
    match op {
        Operator::Identity(_) => y.to_owned(),
        Operator::Mask(mask) => {
            let fill = if mask.is_empty() { T::zero() } else { y.sum() / T::from_usize_lossy(mask.len()) };
            let mut x = Array1::from_elem(mask.n(), fill);
            for (k, &i) in mask.indices().iter().enumerate() {
                x[i] = y[k];
            }
            x
        }
        Operator::Filter { engine: FilterEngine::Exact(basis), kernel, .. } => {
            let h = basis.kernel_values(kernel);
            let hmax = h.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
            let yhat = basis.gft(y).expect("shape checked");
            let xhat = Array1::from_shape_fn(h.len(), |l| {
                if h[l].abs() > hmax * T::c(1e-12) {
                    yhat[l] / h[l]
                } else {
                    T::zero()
                }
            });
            basis.igft(xhat.view()).expect("shape checked")
        }
        _ => {
            let apply = |v: ArrayView1<T>| op.adjoint(op.apply(v).view());
            let rhs = op.adjoint(y);
            conjugate_gradient(apply, rhs.view(), None, cg_tol::<T>(), 20 * op.cols() + 100).x
        }
    }
}

/// Iteration controls for the total-variation solver.
#[derive(Debug, Clone)]
pub struct TvOptions<T> {
    pub max_iter: usize,
    /// Stop when the relative primal change falls below this value.
    pub tol: T,
    /// Starting point. When it is feasible it also serves as the anchor of
    /// the final feasibility step; a least-squares point is used otherwise.
    pub x0: Option<Array1<T>>,
}

impl<T: Real> Default for TvOptions<T> {
    fn default() -> Self {
        Self { max_iter: 3000, tol: T::c(1e-6), x0: None }
    }
}

#[derive(Debug, Clone)]
pub struct TvOutcome<T> {
    pub x: Array1<T>,
    /// `‖∇x‖₁` of the returned point.
    pub tv: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min ‖∇x‖₁` s.t. `‖Hx − y‖ ≤ ε` with default iteration controls.
pub fn tv_solve<T: Real>(
    lap: &Laplacian<T>,
    grad: &GradientOperator<T>,
    op: &Operator<T>,
    y: ArrayView1<T>,
    eps: T,
) -> Result<TvOutcome<T>> {
    tv_solve_with(lap, grad, op, y, eps, &TvOptions::default())
}

/// Primal-dual (Chambolle–Pock) iterations on the constrained problem,
/// followed by a step back into the constraint set so that the returned point
/// is feasible.
///
/// When projecting onto `{x : ‖Hx − y‖ ≤ ε}` is cheap (identity, masks and
/// exactly-applied filters) the constraint is handled as the primal proximal
/// step and only `∇` enters the coupling, so the speed does not depend on the
/// conditioning of `H`. Other operators are coupled through `K = [∇; αH]`.
pub fn tv_solve_with<T: Real>(
    lap: &Laplacian<T>,
    grad: &GradientOperator<T>,
    op: &Operator<T>,
    y: ArrayView1<T>,
    eps: T,
    opts: &TvOptions<T>,
) -> Result<TvOutcome<T>> {
    check_shapes(lap.n(), op, y)?;
    if grad.n_vertices() != lap.n() {
        return Err(Error::DimensionMismatch { expected: lap.n(), got: grad.n_vertices() });
    }
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {eps}")));
    }
    let y = y.to_owned();
    let resid = |v: &Array1<T>| norm(&(&op.apply(v.view()) - &y));

    let warm = match &opts.x0 {
        Some(x0) if x0.len() != lap.n() => return Err(Error::DimensionMismatch { expected: lap.n(), got: x0.len() }),
        Some(x0) => Some(x0.clone()),
        None => None,
    };
    let anchor = match warm.as_ref() {
        Some(x0) if resid(x0) <= eps => x0.clone(),
        _ => {
            let x_ls = least_squares_point(op, y.view());
            let r_ls = resid(&x_ls);
            let slack = T::c(1e-9) * (T::one() + norm(&y));
            if r_ls > eps + slack {
                return Err(Error::Infeasible { min_residual: r_ls.to_f64_lossy(), epsilon: eps.to_f64_lossy() });
            }
            x_ls
        }
    };

    let d_norm2 = grad.norm_sq_bound().min(lap.lambda_max()).max(T::min_positive_value());
    let x0 = warm.unwrap_or_else(|| anchor.clone());
    let (x, iterations, converged) = match Projector::new(op, y.view(), eps) {
        Some(proj) => pdhg_projected(grad, &proj, x0, d_norm2, opts)?,
        None => pdhg_stacked(grad, op, &y, eps, x0, d_norm2, opts)?,
    };
    if !converged {
        log::warn!("tv_solve stopped after {} iterations without reaching tolerance", opts.max_iter);
    }

    let x = restore_feasibility(op, &y, x, &anchor, eps);
    let residual = resid(&x);
    let tv = grad.apply(x.view()).iter().fold(T::zero(), |s, v| s + v.abs());
    Ok(TvOutcome { x, tv, residual, iterations, converged })
}

fn clip_unit<T: Real>(v: Array1<T>) -> Array1<T> {
    v.mapv(|v| v.max(-T::one()).min(T::one()))
}

fn stalled<T: Real>(x_next: &Array1<T>, x: &Array1<T>, tol: T) -> Result<bool> {
    let change = norm(&(x_next - x));
    if !change.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(change <= tol * norm(x_next).max(T::min_positive_value()))
}

fn pdhg_projected<T: Real>(
    grad: &GradientOperator<T>,
    proj: &Projector<'_, T>,
    x0: Array1<T>,
    d_norm2: T,
    opts: &TvOptions<T>,
) -> Result<(Array1<T>, usize, bool)> {
    let step = T::c(0.99) / d_norm2.sqrt();
    let mut x = proj.project(x0);
    let mut xbar = x.clone();
    let mut p = Array1::<T>::zeros(grad.n_edges());
    for it in 1..=opts.max_iter {
        p = clip_unit(&p + &(grad.apply(xbar.view()) * step));
        let x_next = proj.project(&x - &(grad.adjoint(p.view()) * step));
        let done = stalled(&x_next, &x, opts.tol)?;
        xbar = &x_next * T::c(2.0) - &x;
        x = x_next;
        if done {
            return Ok((x, it, true));
        }
    }
    Ok((x, opts.max_iter, false))
}

fn pdhg_stacked<T: Real>(
    grad: &GradientOperator<T>,
    op: &Operator<T>,
    y: &Array1<T>,
    eps: T,
    x0: Array1<T>,
    d_norm2: T,
    opts: &TvOptions<T>,
) -> Result<(Array1<T>, usize, bool)> {
    let h_norm = op.norm_bound().max(T::min_positive_value());
    // Scale the data block so both blocks of K = [∇; αH] have comparable norms.
    let alpha = d_norm2.sqrt() / h_norm;
    let step = T::c(0.99) / (T::c(2.0) * d_norm2).sqrt();
    let mut x = x0;
    let mut xbar = x.clone();
    let mut p = Array1::<T>::zeros(grad.n_edges());
    let mut q = Array1::<T>::zeros(op.rows());
    let ay = y * alpha;
    let radius = alpha * eps;
    for it in 1..=opts.max_iter {
        p = clip_unit(&p + &(grad.apply(xbar.view()) * step));
        let w = &q + &(op.apply(xbar.view()) * (step * alpha));
        q = &w - &(project_ball(&(&w / step), &ay, radius) * step);
        let mut dir = grad.adjoint(p.view());
        dir.scaled_add(alpha, &op.adjoint(q.view()));
        let x_next = &x - &(dir * step);
        let done = stalled(&x_next, &x, opts.tol)?;
        xbar = &x_next * T::c(2.0) - &x;
        x = x_next;
        if done {
            return Ok((x, it, true));
        }
    }
    Ok((x, opts.max_iter, false))
}

/// Euclidean projection onto `{x : ‖Hx − y‖ ≤ ε}` for operators where it has
/// a cheap form.
enum Projector<'a, T: Real> {
    /// Identity or a mask: only the observed entries move, radially toward `y`.
    Rows { indices: Option<&'a [usize]>, y: Array1<T>, eps: T },
    /// Filter `h(L)`: an ellipsoid, diagonal in the Fourier basis.
    Spectral { basis: &'a SpectralBasis<T>, h: Array1<T>, yhat: Array1<T>, eps: T },
}

impl<'a, T: Real> Projector<'a, T> {
    fn new(op: &'a Operator<T>, y: ArrayView1<T>, eps: T) -> Option<Self> {
        match op {
            Operator::Identity(_) => Some(Projector::Rows { indices: None, y: y.to_owned(), eps }),
            Operator::Mask(m) => Some(Projector::Rows { indices: Some(m.indices()), y: y.to_owned(), eps }),
            Operator::Filter { engine: FilterEngine::Exact(basis), kernel, .. } => Some(Projector::Spectral {
                basis,
                h: basis.kernel_values(kernel),
                yhat: basis.gft(y).expect("shape checked"),
                eps,
            }),
            _ => None,
        }
    }

    fn project(&self, mut x: Array1<T>) -> Array1<T> {
        match self {
            Projector::Rows { indices, y, eps } => {
                let pick = |k: usize| indices.map_or(k, |ix| ix[k]);
                let r = norm(&Array1::from_shape_fn(y.len(), |k| x[pick(k)] - y[k]));
                if r > *eps {
                    let scale = *eps / r;
                    for k in 0..y.len() {
                        let i = pick(k);
                        x[i] = y[k] + (x[i] - y[k]) * scale;
                    }
                }
                x
            }
            Projector::Spectral { basis, h, yhat, eps } => {
                let vhat = basis.gft(x.view()).expect("shape checked");
                let a = Array1::from_shape_fn(h.len(), |l| h[l] * vhat[l] - yhat[l]);
                let phi = |mu: T| {
                    a.iter().zip(h.iter()).fold(T::zero(), |s, (&al, &hl)| {
                        let d = T::one() + mu * hl * hl;
                        s + al * al / (d * d)
                    })
                };
                let e2 = *eps * *eps;
                if phi(T::zero()) <= e2 {
                    return x;
                }
                // φ decreases in μ; bracket the root, then bisect keeping the
                // feasible end.
                let mut hi = T::one();
                let mut grow = 0;
                while phi(hi) > e2 && grow < 2000 {
                    hi = hi * T::c(4.0);
                    grow += 1;
                }
                let mut lo = T::zero();
                for _ in 0..200 {
                    let mid = (lo + hi) / T::c(2.0);
                    if !(mid > lo && mid < hi) {
                        break;
                    }
                    if phi(mid) > e2 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let xhat = Array1::from_shape_fn(h.len(), |l| (vhat[l] + hi * h[l] * yhat[l]) / (T::one() + hi * h[l] * h[l]));
                basis.igft(xhat.view()).expect("shape checked")
            }
        }
    }
}

fn project_ball<T: Real>(v: &Array1<T>, center: &Array1<T>, radius: T) -> Array1<T> {
    let d = v - center;
    let r = norm(&d);
    if r <= radius {
        v.clone()
    } else {
        center + &(d * (radius / r))
    }
}

fn restore_feasibility<T: Real>(op: &Operator<T>, y: &Array1<T>, x: Array1<T>, x_ls: &Array1<T>, eps: T) -> Array1<T> {
    let a = &op.apply(x.view()) - y;
    let ra = norm(&a);
    if ra <= eps {
        return x;
    }
    let shrink = T::one() - T::c(4.0) * T::epsilon();
    match op {
        Operator::Identity(_) => y + &(a * (eps * shrink / ra)),
        Operator::Mask(mask) => {
            let mut out = x;
            let target = y + &(a * (eps * shrink / ra));
            for (k, &i) in mask.indices().iter().enumerate() {
                out[i] = target[k];
            }
            out
        }
        _ => {
            // Largest θ with ‖b + θ(a − b)‖ ≤ ε, where b is the residual at x_ls.
            let b = &op.apply(x_ls.view()) - y;
            let d = &a - &b;
            let (dd, bd, bb) = (d.dot(&d), b.dot(&d), b.dot(&b));
            let disc = (bd * bd - dd * (bb - eps * eps)).max(T::zero());
            let mut theta = if dd > T::zero() { ((-bd + disc.sqrt()) / dd).max(T::zero()).min(T::one()) } else { T::zero() };
            let mut out = x_ls + &((&x - x_ls) * theta);
            while norm(&(&op.apply(out.view()) - y)) > eps && theta > T::zero() {
                theta = theta * T::c(0.999) - T::epsilon();
                theta = theta.max(T::zero());
                out = x_ls + &((&x - x_ls) * theta);
            }
            out
        }
    }
}

fn check_shapes<T: Real>(n: usize, op: &Operator<T>, y: ArrayView1<T>) -> Result<()> {
    if op.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: op.cols() });
    }
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch { expected: op.rows(), got: y.len() });
    }
    Ok(())
}

fn norm<T: Real>(x: &Array1<T>) -> T {
    x.dot(x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, random_geometric_graph, Graph};
    use crate::linalg::solve_spd;
    use crate::spectral::{eigendecompose, Kernel};
    use crate::wiener::Mask;

    fn path(n: usize) -> Graph<f64> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Graph::from_edge_list(n, &edges).unwrap()
    }

    #[test]
    fn epsilon_rule_examples() {
        assert_eq!(epsilon_rule(0.0, 10), 0.0);
        assert!((epsilon_rule(0.5f64, 100) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn tikhonov_limits() {
        let g = random_geometric_graph::<f64>(40, 5, 3).unwrap();
        let lap = laplacian(&g);
        let y = Array1::from_shape_fn(40, |i| (i as f64 * 0.3).sin());
        let op = Operator::identity(40);
        let out = tikhonov_solve(&lap, &op, y.view(), 0.0).unwrap();
        assert!((&out.x - &y).iter().all(|v| v.abs() < 1e-12));
        let out = tikhonov_solve(&lap, &op, y.view(), 1e6).unwrap();
        let c = y.mean().unwrap();
        assert!(out.x.iter().all(|v| (v - c).abs() < 1e-12));
    }

    #[test]
    fn tikhonov_matches_dense_lagrangian_oracle() {
        let g = random_geometric_graph::<f64>(50, 6, 11).unwrap();
        let lap = laplacian(&g);
        let basis = eigendecompose(&lap).unwrap();
        let mask = Mask::new(50, (0..50).filter(|i| i % 2 == 0).collect()).unwrap();
        let smooth = basis.igft(Array1::from_shape_fn(50, |l| (-(l as f64) / 4.0).exp()).view()).unwrap();
        let y = mask.select(smooth.view()) + Array1::from_shape_fn(25, |i| 0.02 * ((i * 13 % 7) as f64 - 3.0));
        let eps = 0.05;
        let op = Operator::mask(mask.clone());
        let out = tikhonov_solve(&lap, &op, y.view(), eps).unwrap();
        assert!(out.residual <= eps * (1.0 + 1e-6));

        // Oracle: dense solves of (MᵀM + γL)x = Mᵀy with an independent bisection.
        let l = lap.to_dense();
        let mtm = Array1::from(mask.indicator::<f64>());
        let rhs = mask.scatter(y.view());
        let solve = |gamma: f64| {
            let mut a = &l * gamma;
            for i in 0..50 {
                a[[i, i]] += mtm[i];
            }
            solve_spd(a.view(), rhs.view()).unwrap()
        };
        let resid = |x: &Array1<f64>| norm(&(&mask.select(x.view()) - &y));
        let (mut lo, mut hi) = (1e-10f64, 1e4f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if resid(&solve(mid)) <= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = solve(lo);
        let diff = norm(&(&out.x - &oracle)) / norm(&oracle);
        assert!(diff < 1e-2, "relative gap {diff}");
        let e_out = lap.quadratic_form(out.x.view());
        let e_or = lap.quadratic_form(oracle.view());
        assert!((e_out - e_or).abs() <= 1e-2 * e_or);
    }

    #[test]
    fn tikhonov_spectral_path_is_feasible() {
        let lap = laplacian(&random_geometric_graph::<f64>(60, 6, 5).unwrap());
        let engine = FilterEngine::exact(eigendecompose(&lap).unwrap());
        let op = Operator::filter(engine, Kernel::heat(1.0));
        let y = Array1::from_shape_fn(60, |i| (i as f64 * 0.2).cos());
        for eps in [1e-3, 0.1, 1.0] {
            let out = tikhonov_solve(&lap, &op, y.view(), eps).unwrap();
            assert!(out.residual <= eps * (1.0 + 1e-6));
            assert!(out.residual >= eps * (1.0 - 1e-3) || out.gamma.is_none());
        }
    }

    #[test]
    fn tv_returns_piecewise_constant_input() {
        let g = path(8);
        let lap = laplacian(&g);
        let grad = GradientOperator::new(&g);
        let y = Array1::from(vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let out = tv_solve(&lap, &grad, &Operator::identity(8), y.view(), 0.0).unwrap();
        assert!((&out.x - &y).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn tv_removes_isolated_flip() {
        let g = path(8);
        let lap = laplacian(&g);
        let grad = GradientOperator::new(&g);
        let y = Array1::from(vec![0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let opts = TvOptions { max_iter: 200_000, tol: 1e-12, x0: None };
        let out = tv_solve_with(&lap, &grad, &Operator::identity(8), y.view(), 0.9, &opts).unwrap();
        assert!(out.residual <= 0.9 * (1.0 + 1e-6));
        let d = grad.apply(out.x.view());
        for (e, v) in d.iter().enumerate() {
            if e != 3 {
                assert!(v.abs() < 1e-3, "edge {e}: {v}");
            }
        }
        assert!(out.x[4] > out.x[3] + 0.1);
    }

    #[test]
    fn tv_masked_feasible_and_infeasible() {
        let g = random_geometric_graph::<f64>(60, 6, 8).unwrap();
        let lap = laplacian(&g);
        let grad = GradientOperator::new(&g);
        let mask = Mask::new(60, (0..60).step_by(2).collect()).unwrap();
        let y = Array1::from_shape_fn(30, |i| (i as f64).sin());
        let op = Operator::mask(mask);
        let out = tv_solve(&lap, &grad, &op, y.view(), 0.5).unwrap();
        assert!(out.residual <= 0.5 * (1.0 + 1e-6));

        // A filter whose kernel vanishes on part of the spectrum cannot fit
        // everything.
        let basis = eigendecompose(&lap).unwrap();
        let cut = basis.lambdas()[30];
        let op = Operator::filter(FilterEngine::exact(basis), Kernel::Bandlimit { lambda_c: cut });
        let y = Array1::from_shape_fn(60, |i| if i % 2 == 0 { 1.0 } else { -1.0 });
        assert!(matches!(tv_solve(&lap, &grad, &op, y.view(), 1e-3), Err(Error::Infeasible { .. })));
    }
}
