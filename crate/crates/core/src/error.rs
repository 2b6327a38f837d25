use thiserror::Error;

/// Errors raised by graph construction, spectral routines and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge ({i}, {j}) has non-positive weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({i}, {j}) listed more than once")]
    DuplicateEdge { i: usize, j: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("graph with {n} vertices exceeds the dense eigendecomposition limit of {limit}; use the Chebyshev filtering path")]
    TooLarge { n: usize, limit: usize },
    #[error("eigendecomposition did not converge")]
    EigenNotConverged,
    #[error("need at least 2 realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("signal ensemble is empty")]
    EmptyEnsemble,
    #[error("spectral covariance has negative diagonal entry {value} at index {index}")]
    NegativeDiagonal { index: usize, value: f64 },
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("input matrix is not symmetric")]
    AsymmetricInput,
    #[error("input matrix has a nonzero diagonal")]
    NonzeroDiagonal,
    #[error("operator is not a graph filter")]
    OperatorNotAFilter,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver produced non-finite values")]
    NonFinite,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("constraint set is empty: smallest reachable residual {min_residual} exceeds epsilon {epsilon}")]
    Infeasible { min_residual: f64, epsilon: f64 },
    #[error("reference signal has zero variance")]
    ZeroVarianceReference,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Infeasible { .. } | Error::SingularSystem | Error::EigenNotConverged | Error::NonFinite)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
