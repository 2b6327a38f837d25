//! Dense linear algebra kernels: symmetric eigensolver, factorizations and
//! conjugate gradients. Everything is generic over [`Real`].

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigendecomposition of a dense symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Householder tridiagonalisation followed by the
/// implicit QL iteration (EISPACK `tred2`/`tql2`).
pub fn symmetric_eigen<T: Real>(a: ArrayView2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    // v is row-major n×n holding the accumulated transformation.
    let mut v: Vec<T> = a.iter().copied().collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);

    // z[i*n + k] = v[k*n + i]: rows of z are the eigenvectors, which keeps
    // the Givens rotations in tql2 on contiguous memory.
    let mut z = vec![T::zero(); n * n];
    for k in 0..n {
        for i in 0..n {
            z[i * n + k] = v[k * n + i];
        }
    }
    tql2(n, &mut z, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).unwrap_or(std::cmp::Ordering::Equal));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, col]] = z[src * n + k];
        }
    }
    Ok((values, vectors))
}

fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let at = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                let f = d[j];
                v[at(j, i)] = f;
                let mut g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(n: usize, z: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let max_iter = 30 * n.max(10);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::EigenNotConverged);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (T::c(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for k in 0..n {
                        let hk = row_next[k];
                        row_next[k] = s * row_i[k] + c * hk;
                        row_i[k] = c * row_i[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Cholesky factor `L` with `A = L Lᵀ`; fails with `SingularSystem` when a
/// pivot is not positive relative to the matrix scale.
pub fn cholesky<T: Real>(a: ArrayView2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let scale = a.diag().iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let floor = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > floor) {
            return Err(Error::SingularSystem);
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Real>(l: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Solves a symmetric positive definite system.
pub fn solve_spd<T: Real>(a: ArrayView2<T>, b: ArrayView1<T>) -> Result<Array1<T>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    let l = cholesky(a)?;
    Ok(cholesky_solve(l.view(), b))
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// `rel_tol · max|λ|` are treated as zero.
pub fn symmetric_pinv<T: Real>(a: ArrayView2<T>, rel_tol: T) -> Result<Array2<T>> {
    let (vals, vecs) = symmetric_eigen(a)?;
    let top = vals.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if top == T::zero() {
        return Err(Error::SingularSystem);
    }
    let cut = top * rel_tol;
    let inv = vals.mapv(|x| if x.abs() > cut { T::one() / x } else { T::zero() });
    let scaled = &vecs * &inv.view().insert_axis(ndarray::Axis(0));
    Ok(scaled.dot(&vecs.t()))
}

/// Outcome of a conjugate-gradient run.
#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub x: Array1<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Conjugate gradients for a symmetric positive (semi-)definite operator.
pub fn conjugate_gradient<T: Real, F>(
    apply: F,
    b: ArrayView1<T>,
    x0: Option<ArrayView1<T>>,
    tol: T,
    max_iter: usize,
) -> CgOutcome<T>
where
    F: Fn(ArrayView1<T>) -> Array1<T>,
{
    let mut x = match x0 {
        Some(x0) => x0.to_owned(),
        None => Array1::zeros(b.len()),
    };
    let bnorm = b.dot(&b).sqrt();
    if bnorm == T::zero() {
        return CgOutcome { x: Array1::zeros(b.len()), iterations: 0, relative_residual: T::zero() };
    }
    let mut r = &b - &apply(x.view());
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut it = 0;
    while it < max_iter && rr.sqrt() > tol * bnorm {
        let ap = apply(p.view());
        let pap = p.dot(&ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rr / pap;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        let rr_new = r.dot(&r);
        let beta = rr_new / rr;
        p = &r + &(p * beta);
        rr = rr_new;
        it += 1;
    }
    CgOutcome { x, iterations: it, relative_residual: rr.sqrt() / bnorm }
}
