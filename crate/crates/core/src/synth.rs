//! Synthetic stationary signals, degradations, the SNR metric and the
//! deconvolution / inpainting experiments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{laplacian, random_geometric_graph, GradientOperator, Laplacian};
use crate::psd::{design_filterbank, estimate_psd_with, psd_to_kernel, NormSource, DEFAULT_BANDS};
use crate::rng::{derive_seed, normal_columns, normal_vector, rng_for, stream};
use crate::scalar::Real;
use crate::spectral::{eigendecompose, FilterEngine, Kernel, SpectralBasis};
use crate::stationarity::SignalEnsemble;
use crate::wiener::{
    epsilon_rule, lmmse_with_covariance, tikhonov_solve, tv_solve_with, wiener_filter, wiener_optimize, FistaOptions,
    LinearOperator, Mask, Mean, Operator, TvOptions, WienerProblem,
};

/// `K` realisations `mean·1 + g(L) w_k` with i.i.d. standard normal `w_k`.
///
/// The result has PSD `g²`. Realisation `k` depends only on `(seed, k)`.
pub fn generate_stationary<T: Real>(
    engine: &FilterEngine<T>,
    g: &Kernel<T>,
    k: usize,
    mean: T,
    seed: u64,
) -> Result<SignalEnsemble<T>> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let w = normal_columns::<T>(seed, stream::SIGNAL, engine.n(), k);
    let x = engine.apply(g, w.view())? + mean;
    if mean == T::zero() {
        SignalEnsemble::zero_mean(x)
    } else {
        SignalEnsemble::new(x)
    }
}

/// `y = Hx + σw` with seeded standard normal `w`.
#[derive(Debug, Clone)]
pub struct DegradationModel<T> {
    pub operator: Operator<T>,
    pub sigma: T,
    pub seed: u64,
}

impl<T: Real> DegradationModel<T> {
    pub fn new(operator: Operator<T>, sigma: T, seed: u64) -> Result<Self> {
        if !(sigma >= T::zero()) {
            return Err(Error::InvalidParameter(format!("noise level must be non-negative, got {sigma}")));
        }
        Ok(Self { operator, sigma, seed })
    }
}

pub fn degrade<T: Real>(x: ArrayView1<T>, model: &DegradationModel<T>) -> Result<Array1<T>> {
    if x.len() != model.operator.cols() {
        return Err(Error::DimensionMismatch { expected: model.operator.cols(), got: x.len() });
    }
    let mut y = model.operator.apply(x);
    if model.sigma > T::zero() {
        let w: Array1<T> = normal_vector(&mut rng_for(model.seed, stream::NOISE, 0), y.len());
        y.scaled_add(model.sigma, &w);
    }
    Ok(y)
}

/// Upper bound reported when the estimate is exact.
pub const SNR_CAP_DB: f64 = 300.0;

/// `−10 log₁₀(var(x − x̂) / var(x))` in dB, using population variances.
pub fn snr_db<T: Real>(x_true: ArrayView1<T>, x_est: ArrayView1<T>) -> Result<T> {
    if x_true.len() != x_est.len() {
        return Err(Error::DimensionMismatch { expected: x_true.len(), got: x_est.len() });
    }
    let vx = variance(x_true);
    if !(vx > T::zero()) {
        return Err(Error::ZeroVarianceReference);
    }
    let ve = variance((&x_true - &x_est).view());
    let cap = T::c(SNR_CAP_DB);
    if ve == T::zero() {
        return Ok(cap);
    }
    Ok((-T::c(10.0) * (ve / vx).log10()).min(cap))
}

fn variance<T: Real>(x: ArrayView1<T>) -> T {
    let n = T::from_usize_lossy(x.len());
    let m = x.sum() / n;
    x.iter().map(|&v| (v - m) * (v - m)).fold(T::zero(), |a, b| a + b) / n
}

/// Low-pass PSD amplitude used by the experiments: `s = 1` up to `λmax/4`,
/// raised-cosine roll-off to `0` at `λmax/2`. The PSD is `s²`.
pub fn bandlimited_amplitude<T: Real>(lambda_max: T) -> Kernel<T> {
    Kernel::RaisedCosine { pass: lambda_max / T::c(4.0), stop: lambda_max / T::c(2.0) }
}

/// One line of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub noise_std: f64,
    pub mean_snr_db: f64,
    pub stderr_db: f64,
    pub trials: usize,
    /// Trials whose SNR was not finite (excluded from the mean).
    #[serde(default)]
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub methods: Vec<String>,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub trial_seeds: Vec<u64>,
    pub runtime_secs: f64,
    pub rows: Vec<ReportRow>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "method,noise_std,mean_snr_db,stderr_db,trials";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.method, r.noise_std, r.mean_snr_db, r.stderr_db, r.trials);
        }
        out
    }

    pub fn mean_snr(&self, method: &str, noise_std: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.method == method && r.noise_std == noise_std).map(|r| r.mean_snr_db)
    }

    /// Noise levels at which `a` has a lower mean SNR than `b`.
    pub fn ordering_violations(&self, a: &str, b: &str) -> Vec<f64> {
        self.noise_levels
            .iter()
            .copied()
            .filter(|&s| match (self.mean_snr(a, s), self.mean_snr(b, s)) {
                (Some(x), Some(y)) => !(x >= y),
                _ => true,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DeconvolutionParams {
    pub n_nodes: usize,
    pub k_neighbors: usize,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for DeconvolutionParams {
    fn default() -> Self {
        Self { n_nodes: 300, k_neighbors: 10, noise_levels: vec![0.005, 0.01, 0.02, 0.05], trials: 20, seed: 0 }
    }
}

pub const DECONVOLUTION_METHODS: [&str; 3] = ["wiener", "tikhonov", "tv"];

/// Deconvolution of low-pass stationary signals blurred by `exp(−10λ/λmax)`.
///
/// Each trial draws a new signal and noise on a shared random geometric
/// graph and recovers it with the Wiener filter (true PSD and noise level)
/// and the constrained Tikhonov and TV models with `ε = σ√N`.
pub fn experiment_deconvolution(params: &DeconvolutionParams) -> Result<ExperimentReport> {
    validate_common(params.trials, &params.noise_levels)?;
    let start = Instant::now();
    let setup = Setup::new(params.n_nodes, params.k_neighbors, params.seed)?;
    let lambda_max = setup.basis.lambda_max();
    let engine = FilterEngine::exact(setup.basis.clone());
    let amplitude = bandlimited_amplitude(lambda_max);
    let psd = amplitude.product(&amplitude);
    let blur = Kernel::heat(10.0 / lambda_max);
    let op = Operator::filter(engine.clone(), blur);
    let n = params.n_nodes;

    let trial_seeds = trial_seeds(params.seed, params.trials);
    let per_trial: Vec<Result<Vec<Vec<f64>>>> = trial_seeds
        .par_iter()
        .map(|&ts| {
            let x = generate_stationary(&engine, &amplitude, 1, 0.0, ts)?.into_data().index_axis_move(Axis(1), 0);
            let hx = op.apply(x.view());
            let w: Array1<f64> = normal_vector(&mut rng_for(ts, stream::NOISE, 0), n);
            params
                .noise_levels
                .iter()
                .map(|&sigma| {
                    let y = &hx + &(&w * sigma);
                    let eps = epsilon_rule(sigma, n);
                    let problem = WienerProblem::new(op.clone(), psd.clone(), sigma * sigma, y.clone());
                    let wiener = wiener_filter(&engine, &problem)?;
                    let tik = tikhonov_solve(&setup.lap, &op, y.view(), eps)?.x;
                    let tv = tv_from(&setup, &op, y.view(), eps, &tik)?;
                    [wiener, tik, tv].iter().map(|e| snr_db(x.view(), e.view())).collect()
                })
                .collect()
        })
        .collect();

    let mut metadata = setup.metadata(params.k_neighbors);
    metadata.insert("psd".into(), json!("s(λ)=1 for λ≤λmax/4, raised-cosine roll-off to 0 at λmax/2; PSD = s²"));
    metadata.insert("degradation".into(), json!("heat kernel exp(-10 λ/λmax) plus white noise"));
    metadata.insert("epsilon".into(), json!("sigma * sqrt(N)"));
    finish(
        "deconvolution",
        &DECONVOLUTION_METHODS,
        &params.noise_levels,
        params.seed,
        trial_seeds,
        per_trial,
        metadata,
        start,
    )
}

#[derive(Debug, Clone)]
pub struct InpaintingParams {
    pub n_nodes: usize,
    pub k_neighbors: usize,
    /// Fraction of vertices hidden from the observer.
    pub mask_fraction: f64,
    /// Training signals used by the estimated-PSD Wiener and empirical LMMSE.
    pub k1: usize,
    pub bands: usize,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub fista: FistaOptions<f64>,
}

impl Default for InpaintingParams {
    fn default() -> Self {
        Self {
            n_nodes: 400,
            k_neighbors: 10,
            mask_fraction: 0.5,
            k1: 1,
            bands: DEFAULT_BANDS,
            noise_levels: vec![0.01, 0.02, 0.05, 0.1],
            trials: 20,
            seed: 0,
            fista: FistaOptions::default(),
        }
    }
}

pub const INPAINTING_METHODS: [&str; 5] = ["wiener", "wiener_estimated_psd", "tikhonov", "tv", "lmmse_empirical"];

/// Inpainting with a random mask plus white noise.
///
/// Compares Wiener optimisation with the true PSD, Wiener optimisation with a
/// PSD estimated from `k1` independent training signals, constrained
/// Tikhonov and TV with `ε = σ√m`, and the LMMSE estimator built on the
/// empirical covariance of the same training signals.
pub fn experiment_inpainting(params: &InpaintingParams) -> Result<ExperimentReport> {
    validate_common(params.trials, &params.noise_levels)?;
    if !(params.mask_fraction > 0.0 && params.mask_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("mask fraction must lie in (0, 1), got {}", params.mask_fraction)));
    }
    if params.k1 == 0 {
        return Err(Error::InvalidParameter("k1 must be at least 1".into()));
    }
    let start = Instant::now();
    let n = params.n_nodes;
    let setup = Setup::new(n, params.k_neighbors, params.seed)?;
    let lambda_max = setup.basis.lambda_max();
    let engine = FilterEngine::exact(setup.basis.clone());
    let amplitude = bandlimited_amplitude(lambda_max);
    let psd = amplitude.product(&amplitude);
    let hidden = ((params.mask_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let observed = n - hidden;
    let fb = design_filterbank(lambda_max, params.bands)?;

    let trial_seeds = trial_seeds(params.seed, params.trials);
    let per_trial: Vec<Result<Vec<Vec<f64>>>> = trial_seeds
        .par_iter()
        .map(|&ts| {
            let x = generate_stationary(&engine, &amplitude, 1, 0.0, ts)?.into_data().index_axis_move(Axis(1), 0);
            let mut idx = sample(&mut rng_for(ts, stream::MASK, 0), n, observed).into_vec();
            idx.sort_unstable();
            let mask = Mask::new(n, idx)?;
            let op = Operator::mask(mask.clone());
            let hx = op.apply(x.view());
            let w: Array1<f64> = normal_vector(&mut rng_for(ts, stream::NOISE, 0), observed);

            let training = generate_stationary(&engine, &amplitude, params.k1, 0.0, derive_seed(ts, stream::TRAINING, 0))?;
            let est = estimate_psd_with(&engine, &training, &fb, NormSource::Exact(&setup.basis))?;
            let est_psd = psd_to_kernel(&est)?;
            let t = training.data();
            let cov: Array2<f64> = t.dot(&t.t()) / params.k1 as f64;
            let h_dense = op.to_dense();

            params
                .noise_levels
                .iter()
                .map(|&sigma| {
                    let y = &hx + &(&w * sigma);
                    let eps = epsilon_rule(sigma, observed);
                    let s2 = sigma * sigma;
                    let wiener = wiener_optimize(
                        &engine,
                        &WienerProblem::new(op.clone(), psd.clone(), s2, y.clone()),
                        &params.fista,
                    )?
                    .x;
                    let wiener_est = wiener_optimize(
                        &engine,
                        &WienerProblem::new(op.clone(), est_psd.clone(), s2, y.clone()),
                        &params.fista,
                    )?
                    .x;
                    let tik = tikhonov_solve(&setup.lap, &op, y.view(), eps)?.x;
                    let tv = tv_from(&setup, &op, y.view(), eps, &tik)?;
                    let lmmse = lmmse_with_covariance(cov.view(), h_dense.view(), y.view(), s2, &Mean::zero())?;
                    [wiener, wiener_est, tik, tv, lmmse].iter().map(|e| snr_db(x.view(), e.view())).collect()
                })
                .collect()
        })
        .collect();

    let mut metadata = setup.metadata(params.k_neighbors);
    metadata.insert("psd".into(), json!("s(λ)=1 for λ≤λmax/4, raised-cosine roll-off to 0 at λmax/2; PSD = s²"));
    metadata.insert("mask_fraction".into(), json!(params.mask_fraction));
    metadata.insert("observed".into(), json!(observed));
    metadata.insert("k1".into(), json!(params.k1));
    metadata.insert("bands".into(), json!(params.bands));
    metadata.insert("epsilon".into(), json!("sigma * sqrt(m)"));
    metadata.insert("empirical_covariance".into(), json!("(1/K1) Σ x_k x_kᵀ, zero mean known"));
    finish(
        "inpainting",
        &INPAINTING_METHODS,
        &params.noise_levels,
        params.seed,
        trial_seeds,
        per_trial,
        metadata,
        start,
    )
}

struct Setup {
    lap: Laplacian<f64>,
    grad: GradientOperator<f64>,
    basis: SpectralBasis<f64>,
}

impl Setup {
    fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        let graph = random_geometric_graph::<f64>(n, k, derive_seed(seed, stream::GRAPH, 0))?;
        let lap = laplacian(&graph);
        let basis = eigendecompose(&lap)?;
        // Exact spectrum available: use it for every bound downstream.
        let lap = lap.with_lambda_max(basis.lambda_max());
        let grad = GradientOperator::new(&graph);
        Ok(Self { lap, grad, basis })
    }

    fn metadata(&self, k: usize) -> BTreeMap<String, serde_json::Value> {
        let g = self.lap.graph();
        BTreeMap::from([
            ("graph".to_string(), json!(format!("random geometric, {k}-NN, Gaussian weights"))),
            ("n_nodes".to_string(), json!(g.n_vertices())),
            ("n_edges".to_string(), json!(g.n_edges())),
            ("lambda_max".to_string(), json!(self.basis.lambda_max())),
        ])
    }
}

/// TV warm-started from the (feasible) Tikhonov solution.
fn tv_from(setup: &Setup, op: &Operator<f64>, y: ArrayView1<f64>, eps: f64, start: &Array1<f64>) -> Result<Array1<f64>> {
    let opts = TvOptions { x0: Some(start.clone()), ..TvOptions::default() };
    Ok(tv_solve_with(&setup.lap, &setup.grad, op, y, eps, &opts)?.x)
}

fn validate_common(trials: usize, noise_levels: &[f64]) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if noise_levels.is_empty() || noise_levels.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("noise levels must be a non-empty list of non-negative values".into()));
    }
    Ok(())
}

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|t| derive_seed(seed, stream::TRIAL, t)).collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    name: &str,
    methods: &[&str],
    noise_levels: &[f64],
    seed: u64,
    trial_seeds: Vec<u64>,
    per_trial: Vec<Result<Vec<Vec<f64>>>>,
    metadata: BTreeMap<String, serde_json::Value>,
    start: Instant,
) -> Result<ExperimentReport> {
    let per_trial: Vec<Vec<Vec<f64>>> = per_trial.into_iter().collect::<Result<_>>()?;
    let trials = per_trial.len();
    let mut rows = Vec::new();
    for (mi, method) in methods.iter().enumerate() {
        for (si, &sigma) in noise_levels.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|t| t[si][mi]).filter(|v| v.is_finite()).collect();
            let k = values.len();
            let mean = if k > 0 { values.iter().sum::<f64>() / k as f64 } else { f64::NAN };
            let stderr = if k > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
                (var / k as f64).sqrt()
            } else {
                0.0
            };
            rows.push(ReportRow {
                method: method.to_string(),
                noise_std: sigma,
                mean_snr_db: mean,
                stderr_db: stderr,
                trials,
                flagged: trials - k,
            });
        }
    }
    Ok(ExperimentReport {
        experiment: name.into(),
        methods: methods.iter().map(|s| s.to_string()).collect(),
        noise_levels: noise_levels.to_vec(),
        trials,
        seed,
        trial_seeds,
        runtime_secs: start.elapsed().as_secs_f64(),
        rows,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ring_graph;

    fn ring_engine(n: usize) -> FilterEngine<f64> {
        let lap = laplacian(&ring_graph::<f64>(n).unwrap());
        FilterEngine::exact(eigendecompose(&lap).unwrap())
    }

    #[test]
    fn snr_examples() {
        let x = Array1::from(vec![1.0, -1.0, 2.0, 0.0]);
        assert_eq!(snr_db(x.view(), x.view()).unwrap(), 300.0);
        let zero = Array1::<f64>::zeros(4);
        assert!(snr_db(x.view(), zero.view()).unwrap().abs() < 1e-12);
        let scaled = &x * (1.0 - 0.1f64.sqrt());
        assert!((snr_db(x.view(), scaled.view()).unwrap() - 10.0).abs() < 1e-10);
        assert_eq!(snr_db(Array1::from_elem(3, 2.0).view(), zero.slice(ndarray::s![..3])), Err(Error::ZeroVarianceReference));
    }

    #[test]
    fn degrade_examples() {
        let x = Array1::from_shape_fn(10, |i| i as f64);
        let id = DegradationModel::new(Operator::identity(10), 0.0, 1).unwrap();
        assert_eq!(degrade(x.view(), &id).unwrap(), x);
        let m = DegradationModel::new(Operator::mask(Mask::new(10, vec![2, 5, 7]).unwrap()), 0.3, 4).unwrap();
        let a = degrade(x.view(), &m).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, degrade(x.view(), &m).unwrap());
        assert!(degrade(Array1::zeros(9).view(), &m).is_err());
        assert!(DegradationModel::new(Operator::<f64>::identity(3), -1.0, 0).is_err());
    }

    #[test]
    fn zero_kernel_gives_constant_ensemble() {
        let e = ring_engine(12);
        let ens = generate_stationary(&e, &Kernel::constant(0.0), 5, 2.5, 3).unwrap();
        assert!(ens.data().iter().all(|v: &f64| (v - 2.5).abs() < 1e-12));
        assert!(!ens.is_centered());
    }

    #[test]
    fn generation_is_seeded() {
        let e = ring_engine(16);
        let a = generate_stationary(&e, &Kernel::heat(1.0), 3, 0.0, 9).unwrap();
        let b = generate_stationary(&e, &Kernel::heat(1.0), 3, 0.0, 9).unwrap();
        let c = generate_stationary(&e, &Kernel::heat(1.0), 3, 0.0, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_centered());
    }

    #[test]
    fn report_csv_shape() {
        let report = ExperimentReport {
            experiment: "x".into(),
            methods: vec!["a".into()],
            noise_levels: vec![0.1],
            trials: 2,
            seed: 0,
            trial_seeds: vec![1, 2],
            runtime_secs: 0.0,
            rows: vec![ReportRow { method: "a".into(), noise_std: 0.1, mean_snr_db: 3.5, stderr_db: 0.2, trials: 2, flagged: 0 }],
            metadata: BTreeMap::new(),
        };
        assert_eq!(report.to_csv(), "method,noise_std,mean_snr_db,stderr_db,trials\na,0.1,3.5,0.2,2\n");
    }

    #[test]
    fn small_deconvolution_runs_and_is_reproducible() {
        let p = DeconvolutionParams { n_nodes: 60, k_neighbors: 6, noise_levels: vec![0.0, 0.05], trials: 2, seed: 3 };
        let a = experiment_deconvolution(&p).unwrap();
        let b = experiment_deconvolution(&p).unwrap();
        assert_eq!(a.rows, b.rows);
        assert!(a.mean_snr("wiener", 0.0).unwrap() >= 100.0);
    }

    #[test]
    fn degenerate_mask_still_reports() {
        let p = InpaintingParams {
            n_nodes: 40,
            k_neighbors: 5,
            mask_fraction: 1.0 - 1.0 / 40.0,
            noise_levels: vec![0.05],
            trials: 1,
            ..InpaintingParams::default()
        };
        let r = experiment_inpainting(&p).unwrap();
        assert_eq!(r.rows.len(), INPAINTING_METHODS.len());
        assert_eq!(r.metadata["observed"], json!(1));
    }
}
