use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{FilterEngine, Kernel};

/// A linear map with a known adjoint and an upper bound on its spectral norm.
pub trait LinearOperator<T: Real> {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: ArrayView1<T>) -> Array1<T>;
    fn adjoint(&self, y: ArrayView1<T>) -> Array1<T>;
    /// Upper bound on `‖H‖₂`.
    fn norm_bound(&self) -> T;

    /// Dense `rows × cols` matrix, built column by column.
    fn to_dense(&self) -> Array2<T> {
        let n = self.cols();
        let mut out = Array2::zeros((self.rows(), n));
        let mut e = Array1::zeros(n);
        for j in 0..n {
            e[j] = T::one();
            out.column_mut(j).assign(&self.apply(e.view()));
            e[j] = T::zero();
        }
        out
    }
}

/// Row selection `x ↦ (x[i])_{i ∈ indices}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    n: usize,
    indices: Vec<usize>,
}

impl Mask {
    /// Indices must be unique and below `n`; they are kept in the given order.
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::InvalidParameter(format!("mask index {i} repeated")));
            }
            seen[i] = true;
        }
        Ok(Self { n, indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn select<T: Real>(&self, x: ArrayView1<T>) -> Array1<T> {
        self.indices.iter().map(|&i| x[i]).collect()
    }

    pub fn scatter<T: Real>(&self, y: ArrayView1<T>) -> Array1<T> {
        let mut out = Array1::zeros(self.n);
        for (k, &i) in self.indices.iter().enumerate() {
            out[i] = y[k];
        }
        out
    }

    /// 0/1 indicator of the observed vertices.
    pub fn indicator<T: Real>(&self) -> Array1<T> {
        self.scatter(Array1::ones(self.len()).view())
    }
}

/// Measurement operators used by the solvers.
#[derive(Debug, Clone)]
pub enum Operator<T> {
    Identity(usize),
    Mask(Mask),
    /// Graph filter `h(L)`.
    Filter { engine: FilterEngine<T>, kernel: Kernel<T>, norm: T },
    /// `M h(L)`: filtering followed by sampling.
    MaskedFilter { mask: Mask, engine: FilterEngine<T>, kernel: Kernel<T>, norm: T },
}

impl<T: Real> Operator<T> {
    pub fn identity(n: usize) -> Self {
        Operator::Identity(n)
    }

    pub fn mask(mask: Mask) -> Self {
        Operator::Mask(mask)
    }

    /// Graph filter; the norm bound is `max |h|` over the spectrum.
    pub fn filter(engine: FilterEngine<T>, kernel: Kernel<T>) -> Self {
        let norm = engine.kernel_sup(&kernel);
        Operator::Filter { engine, kernel, norm }
    }

    pub fn masked_filter(mask: Mask, engine: FilterEngine<T>, kernel: Kernel<T>) -> Result<Self> {
        if mask.n() != engine.n() {
            return Err(Error::DimensionMismatch { expected: engine.n(), got: mask.n() });
        }
        let norm = engine.kernel_sup(&kernel);
        Ok(Operator::MaskedFilter { mask, engine, kernel, norm })
    }

    /// The kernel `h` when the operator is diagonal in the graph Fourier basis.
    pub fn filter_kernel(&self) -> Option<Kernel<T>> {
        match self {
            Operator::Identity(_) => Some(Kernel::constant(T::one())),
            Operator::Filter { kernel, .. } => Some(kernel.clone()),
            _ => None,
        }
    }

    pub fn as_mask(&self) -> Option<&Mask> {
        match self {
            Operator::Mask(m) => Some(m),
            _ => None,
        }
    }

    fn filt(engine: &FilterEngine<T>, kernel: &Kernel<T>, x: ArrayView1<T>) -> Array1<T> {
        engine.apply_vec(kernel, x).expect("operator dimensions are checked at construction")
    }
}

impl<T: Real> LinearOperator<T> for Operator<T> {
    fn rows(&self) -> usize {
        match self {
            Operator::Identity(n) => *n,
            Operator::Mask(m) => m.len(),
            Operator::Filter { engine, .. } => engine.n(),
            Operator::MaskedFilter { mask, .. } => mask.len(),
        }
    }

    fn cols(&self) -> usize {
        match self {
            Operator::Identity(n) => *n,
            Operator::Mask(m) => m.n(),
            Operator::Filter { engine, .. } | Operator::MaskedFilter { engine, .. } => engine.n(),
        }
    }

    fn apply(&self, x: ArrayView1<T>) -> Array1<T> {
        match self {
            Operator::Identity(_) => x.to_owned(),
            Operator::Mask(m) => m.select(x),
            Operator::Filter { engine, kernel, .. } => Self::filt(engine, kernel, x),
            Operator::MaskedFilter { mask, engine, kernel, .. } => mask.select(Self::filt(engine, kernel, x).view()),
        }
    }

    fn adjoint(&self, y: ArrayView1<T>) -> Array1<T> {
        match self {
            Operator::Identity(_) => y.to_owned(),
            Operator::Mask(m) => m.scatter(y),
            Operator::Filter { engine, kernel, .. } => Self::filt(engine, kernel, y),
            Operator::MaskedFilter { mask, engine, kernel, .. } => Self::filt(engine, kernel, mask.scatter(y).view()),
        }
    }

    fn norm_bound(&self) -> T {
        match self {
            Operator::Identity(_) | Operator::Mask(_) => T::one(),
            Operator::Filter { norm, .. } | Operator::MaskedFilter { norm, .. } => *norm,
        }
    }

    fn to_dense(&self) -> Array2<T> {
        match self {
            Operator::Filter { engine: FilterEngine::Exact(b), kernel, .. } => b.kernel_matrix(kernel),
            Operator::MaskedFilter { mask, engine: FilterEngine::Exact(b), kernel, .. } => {
                b.kernel_matrix(kernel).select(Axis(0), mask.indices())
            }
            Operator::Mask(m) => {
                let mut d = Array2::zeros((m.len(), m.n()));
                for (k, &i) in m.indices().iter().enumerate() {
                    d[[k, i]] = T::one();
                }
                d
            }
            Operator::Identity(n) => Array2::eye(*n),
            _ => {
                let n = self.cols();
                let mut out = Array2::zeros((self.rows(), n));
                let mut e = Array1::zeros(n);
                for j in 0..n {
                    e[j] = T::one();
                    out.column_mut(j).assign(&self.apply(e.view()));
                    e[j] = T::zero();
                }
                out
            }
        }
    }
}
