use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Stationary signal processing on weighted undirected graphs.
///
/// Structured results go to stdout (or the file named by `-o`); diagnostics
/// go to stderr. Exit status is 0 on success, 2 for bad input and 3 when a
/// numerical routine fails.
#[derive(Debug, Parser)]
#[command(name = "gsig", version)]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GSIG_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and write it as an `i,j,w` edge list.
    Graph(GraphArgs),
    /// Generate stationary signals by filtering white noise, or degrade them.
    Synth(SynthArgs),
    /// Estimate the power spectral density of a signal ensemble.
    Psd(PsdArgs),
    /// Solve a recovery problem y = Hx + noise.
    Solve(SolveArgs),
    /// Measure how stationary an ensemble is on a graph.
    Stationarity(StationarityArgs),
    /// Run a synthetic recovery experiment and report SNR per noise level.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(subcommand)]
    pub kind: GraphKind,

    /// Edge-list output (stdout when omitted). Stats JSON then goes to stdout
    /// when a file is given and to stderr otherwise.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GraphKind {
    /// Validate and normalise an existing edge list.
    Build {
        #[arg(long)]
        edges: PathBuf,
        /// Vertex count, if larger than the largest index in the file.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// k-nearest-neighbour graph with Gaussian weights from a feature CSV.
    Knn {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Kernel width; the mean retained squared distance when omitted.
        #[arg(long)]
        sigma2: Option<f64>,
    },
    /// Cycle graph with unit weights.
    Ring {
        #[arg(long)]
        n: usize,
    },
    /// 4-connected grid with unit weights.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// k-NN graph of uniform random points in the unit square.
    Geometric {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum EngineChoice {
    /// Exact below 2000 vertices, Chebyshev above.
    Auto,
    Exact,
    Chebyshev,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// How graph filters are applied.
    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,
    /// Chebyshev polynomial order.
    #[arg(long, default_value_t = 30)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Debug, Subcommand)]
pub enum SynthKind {
    /// `mean + g(L) w` for K independent white-noise draws; an N × K CSV.
    Signals {
        #[arg(long)]
        graph: PathBuf,
        /// Kernel JSON, inline or a file path.
        #[arg(long)]
        kernel: String,
        /// Number of realisations.
        #[arg(long = "realizations", short = 'k', default_value_t = 1)]
        realizations: usize,
        #[arg(long, default_value_t = 0.0)]
        mean: f64,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply the operator of a problem file and add white noise of std `sigma`.
    Degrade {
        #[arg(long)]
        graph: PathBuf,
        /// Problem JSON (only `operator` is read).
        #[arg(long)]
        problem: PathBuf,
        /// Signal vector CSV.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// N × K signal CSV.
    #[arg(long)]
    pub signals: PathBuf,
    /// Number of filterbank bands.
    #[arg(long = "bands", short = 'm', default_value_t = 30)]
    pub bands: usize,
    #[arg(long, default_value_t = 30)]
    pub order: usize,
    /// Random probes for the filter norms.
    #[arg(long, default_value_t = 4)]
    pub k2: usize,
    /// Remove the empirical mean first (otherwise signals are taken as zero mean).
    #[arg(long)]
    pub center: bool,
    /// Also write the estimate obtained with the full eigendecomposition.
    #[arg(long, value_name = "PATH")]
    pub exact: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Method {
    /// Accelerated proximal-gradient Wiener optimisation.
    Wiener,
    /// Closed-form Wiener filter (H must be a graph filter).
    Filter,
    /// Minimum xᵀLx subject to ‖Hx − y‖ ≤ ε.
    Tikhonov,
    /// Minimum ‖∇x‖₁ subject to ‖Hx − y‖ ≤ ε.
    Tv,
    /// Dense LMMSE estimate (white noise).
    Lmmse,
    /// Noise-free interpolation: Hx = y exactly.
    Interp,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub problem: PathBuf,
    /// Measurement vector CSV.
    #[arg(long)]
    pub y: PathBuf,
    /// Write the iteration trace JSON here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StationarityArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub signals: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub threshold: f64,
    /// PSD entries included in the report.
    #[arg(long, default_value_t = 10)]
    pub preview: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Heat-kernel deconvolution.
    Deconv,
    /// Random-mask inpainting.
    Inpaint,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    /// Graph size (default 300 for deconv, 400 for inpaint).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Neighbours per vertex in the random geometric graph.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Comma-separated noise standard deviations.
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    /// Fraction of hidden vertices (inpaint).
    #[arg(long, default_value_t = 0.5)]
    pub mask: f64,
    /// Training signals for the estimated PSD (inpaint).
    #[arg(long, default_value_t = 1)]
    pub k1: usize,
    /// Report CSV (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the report JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
