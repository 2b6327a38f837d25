use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ndarray::{Array1, Array2};

use gsig::graph::{grid_graph, knn_graph, laplacian, random_geometric_graph, ring_graph, GradientOperator, Graph, Laplacian, Sigma2};
use gsig::io::{self as gio, ProblemSpec, SolverTrace};
use gsig::psd::{design_filterbank, estimate_psd_with, NormSource};
use gsig::spectral::{eigendecompose, FilterEngine, Kernel};
use gsig::stationarity::{stationarity_report, SignalEnsemble};
use gsig::synth::{degrade, experiment_deconvolution, experiment_inpainting, generate_stationary, DeconvolutionParams, DegradationModel, InpaintingParams};
use gsig::wiener::{
    lmmse_closed_form, tikhonov_solve, tv_solve, wiener_filter, wiener_interpolate_noiseless, wiener_optimize, LinearOperator,
    WienerProblem,
};

use crate::args::*;

/// Graphs up to this size use the exact spectral path under `--engine auto`.
const AUTO_EXACT_LIMIT: usize = 2000;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Graph(a) => cmd_graph(a, cli.seed),
        Command::Synth(a) => cmd_synth(a, cli.seed),
        Command::Psd(a) => cmd_psd(a, cli.seed),
        Command::Solve(a) => cmd_solve(a),
        Command::Stationarity(a) => cmd_stationarity(a),
        Command::Experiment(a) => cmd_experiment(a, cli.seed),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

/// Runs `f` against the file at `path`, or stdout when there is none.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> gsig::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?);
            f(&mut w).with_context(|| format!("writing {}", p.display()))?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<Graph<f64>> {
    let edges = gio::read_edge_list::<f64, _>(open(path)?).with_context(|| format!("reading edge list {}", path.display()))?;
    edges.into_graph(None).with_context(|| format!("building graph from {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    gio::read_matrix(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn read_vector(path: &Path) -> Result<Array1<f64>> {
    gio::read_vector(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn read_kernel(arg: &str) -> Result<Kernel<f64>> {
    let k: Kernel<f64> = if arg.trim_start().starts_with('{') {
        gio::read_json(arg.as_bytes()).context("parsing inline kernel JSON")?
    } else {
        gio::read_json(open(Path::new(arg))?).with_context(|| format!("reading kernel {arg}"))?
    };
    k.validate()?;
    Ok(k)
}

fn read_problem(path: &Path) -> Result<ProblemSpec<f64>> {
    gio::read_json(open(path)?).with_context(|| format!("reading problem {}", path.display()))
}

fn build_engine(lap: &Laplacian<f64>, e: &EngineArgs) -> Result<FilterEngine<f64>> {
    let exact = match e.engine {
        EngineChoice::Exact => true,
        EngineChoice::Chebyshev => false,
        EngineChoice::Auto => lap.n() <= AUTO_EXACT_LIMIT,
    };
    if exact {
        Ok(FilterEngine::exact(eigendecompose(lap)?))
    } else {
        if e.order == 0 {
            bail!("--order must be at least 1");
        }
        Ok(FilterEngine::chebyshev(lap.clone(), e.order))
    }
}

fn graph_stats(g: &Graph<f64>) -> serde_json::Value {
    let lap = laplacian(g);
    let deg = g.degrees();
    serde_json::json!({
        "n_vertices": g.n_vertices(),
        "n_edges": g.n_edges(),
        "connected_components": g.connected_components(),
        "min_degree": deg.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_degree": deg.iter().cloned().fold(0.0, f64::max),
        "lambda_max_bound": lap.lambda_max(),
    })
}

fn cmd_graph(a: &GraphArgs, seed: u64) -> Result<()> {
    let g = match &a.kind {
        GraphKind::Build { edges, nodes } => {
            let list = gio::read_edge_list::<f64, _>(open(edges)?).with_context(|| format!("reading edge list {}", edges.display()))?;
            list.into_graph(*nodes)?
        }
        GraphKind::Knn { features, k, sigma2 } => {
            let f = read_matrix(features)?;
            let s = sigma2.map_or(Sigma2::Auto, Sigma2::Fixed);
            knn_graph(f.view(), *k, s)?
        }
        GraphKind::Ring { n } => ring_graph(*n)?,
        GraphKind::Grid { rows, cols } => grid_graph(*rows, *cols)?,
        GraphKind::Geometric { n, k } => random_geometric_graph(*n, *k, seed)?,
    };
    emit(a.output.as_deref(), |w| gio::write_edge_list(w, &g))?;
    let stats = serde_json::to_string(&graph_stats(&g))?;
    if a.output.is_some() {
        println!("{stats}");
    } else {
        eprintln!("{stats}");
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs, seed: u64) -> Result<()> {
    match &a.kind {
        SynthKind::Signals { graph, kernel, realizations, mean, engine, output } => {
            let lap = laplacian(&read_graph(graph)?);
            let g = read_kernel(kernel)?;
            let engine = build_engine(&lap, engine)?;
            let ens = generate_stationary(&engine, &g, *realizations, *mean, seed)?;
            emit(output.as_deref(), |w| gio::write_matrix(w, &ens.into_data()))
        }
        SynthKind::Degrade { graph, problem, signal, sigma, engine, output } => {
            let lap = laplacian(&read_graph(graph)?);
            let spec = read_problem(problem)?;
            let x = read_vector(signal)?;
            let engine = build_engine(&lap, engine)?;
            let op = spec.operator.build(&engine)?;
            let model = DegradationModel::new(op, *sigma, seed)?;
            let y = degrade(x.view(), &model)?;
            emit(output.as_deref(), |w| gio::write_vector(w, &y))
        }
    }
}

fn ensemble(data: Array2<f64>, center: bool) -> Result<SignalEnsemble<f64>> {
    Ok(if center {
        let e = SignalEnsemble::new(data)?;
        if e.n_realizations() >= 2 {
            e.center()
        } else {
            e.center_scalar()
        }
    } else {
        SignalEnsemble::zero_mean(data)?
    })
}

fn cmd_psd(a: &PsdArgs, seed: u64) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let x = read_matrix(&a.signals)?;
    if x.nrows() != g.n_vertices() {
        bail!(gsig::Error::DimensionMismatch { expected: g.n_vertices(), got: x.nrows() });
    }
    if a.order == 0 {
        bail!("--order must be at least 1");
    }
    let ens = ensemble(x, a.center)?;
    let lap = Arc::new(laplacian(&g));
    let fb = design_filterbank(lap.lambda_max(), a.bands)?;
    let engine = FilterEngine::chebyshev(lap.clone(), a.order);
    let est = estimate_psd_with(&engine, &ens, &fb, NormSource::Stochastic { k2: a.k2, seed })?;
    emit(a.output.as_deref(), |w| gio::write_json(w, &est))?;
    if let Some(path) = &a.exact {
        let basis = eigendecompose(&lap)?;
        let exact_engine = FilterEngine::exact(basis.clone());
        let exact = estimate_psd_with(&exact_engine, &ens, &fb, NormSource::Exact(&basis))?;
        emit(Some(path), |w| gio::write_json(w, &exact))?;
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let spec = read_problem(&a.problem)?;
    let y = read_vector(&a.y)?;
    let lap = laplacian(&g);
    let needs_basis = matches!(a.method, Method::Lmmse | Method::Interp);
    if needs_basis && a.engine.engine == EngineChoice::Chebyshev {
        bail!("--method {:?} needs the exact engine", a.method);
    }
    let engine = if needs_basis {
        FilterEngine::exact(eigendecompose(&lap)?)
    } else {
        build_engine(&lap, &a.engine)?
    };
    let lap = match engine.basis() {
        Some(b) => lap.with_lambda_max(b.lambda_max()),
        None => lap,
    };
    let op = spec.operator.build(&engine)?;
    if y.len() != op.rows() {
        bail!(gsig::Error::DimensionMismatch { expected: op.rows(), got: y.len() });
    }
    let wiener_problem = |spec: &ProblemSpec<f64>| -> Result<WienerProblem<f64>> {
        Ok(WienerProblem {
            operator: op.clone(),
            psd: spec.psd()?,
            noise: spec.noise()?.kernel(),
            mean: spec.mean(),
            y: y.clone(),
        })
    };

    let (x, trace) = match a.method {
        Method::Wiener => {
            let out = wiener_optimize(&engine, &wiener_problem(&spec)?, &spec.solver.fista_options())?;
            if !out.converged {
                log::warn!("stopped after {} iterations without reaching the tolerance", out.iterations);
            }
            let trace = SolverTrace::from(&out);
            (out.x, trace)
        }
        Method::Filter => (wiener_filter(&engine, &wiener_problem(&spec)?)?, single(f64::NAN, 0)),
        Method::Tikhonov => {
            let out = tikhonov_solve(&lap, &op, y.view(), spec.epsilon()?)?;
            let energy = lap.quadratic_form(out.x.view());
            (out.x, single(energy, out.steps))
        }
        Method::Tv => {
            let grad = GradientOperator::new(&g);
            let out = tv_solve(&lap, &grad, &op, y.view(), spec.epsilon()?)?;
            let trace = SolverTrace { objective: vec![out.tv], iterations: out.iterations, converged: out.converged };
            (out.x, trace)
        }
        Method::Lmmse => {
            let basis = engine.basis().expect("exact engine");
            let sigma2 = spec.noise()?.sigma2().context("lmmse needs white noise: give `noise` as {\"sigma2\": ...}")?;
            (lmmse_closed_form(basis, &wiener_problem(&spec)?, sigma2)?, single(f64::NAN, 0))
        }
        Method::Interp => {
            let basis = engine.basis().expect("exact engine");
            let problem = WienerProblem {
                operator: op.clone(),
                psd: spec.psd()?,
                noise: Kernel::constant(0.0),
                mean: spec.mean(),
                y: y.clone(),
            };
            (wiener_interpolate_noiseless(basis, &problem)?, single(f64::NAN, 0))
        }
    };
    emit(a.output.as_deref(), |w| gio::write_vector(w, &x))?;
    if let Some(path) = &a.trace {
        emit(Some(path), |w| gio::write_json(w, &trace))?;
    }
    Ok(())
}

fn single(objective: f64, iterations: usize) -> SolverTrace {
    let objective = if objective.is_finite() { vec![objective] } else { Vec::new() };
    SolverTrace { objective, iterations, converged: true }
}

fn cmd_stationarity(a: &StationarityArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let x = read_matrix(&a.signals)?;
    if x.nrows() != g.n_vertices() {
        bail!(gsig::Error::DimensionMismatch { expected: g.n_vertices(), got: x.nrows() });
    }
    if x.ncols() < 2 {
        bail!(gsig::Error::TooFewRealizations(x.ncols()));
    }
    let basis = eigendecompose(&laplacian(&g))?;
    let report = stationarity_report(&basis, &SignalEnsemble::new(x)?, a.threshold, a.preview)?;
    emit(a.output.as_deref(), |w| gio::write_json(w, &report))
}

fn cmd_experiment(a: &ExperimentArgs, seed: u64) -> Result<()> {
    let report = match a.kind {
        ExperimentKind::Deconv => {
            let d = DeconvolutionParams::default();
            experiment_deconvolution(&DeconvolutionParams {
                n_nodes: a.nodes.unwrap_or(d.n_nodes),
                k_neighbors: a.k,
                noise_levels: a.noise.clone().unwrap_or(d.noise_levels),
                trials: a.trials,
                seed,
            })?
        }
        ExperimentKind::Inpaint => {
            let d = InpaintingParams::default();
            experiment_inpainting(&InpaintingParams {
                n_nodes: a.nodes.unwrap_or(d.n_nodes),
                k_neighbors: a.k,
                mask_fraction: a.mask,
                k1: a.k1,
                noise_levels: a.noise.clone().unwrap_or(d.noise_levels),
                trials: a.trials,
                seed,
                ..d
            })?
        }
    };
    emit(a.output.as_deref(), |w| Ok(w.write_all(report.to_csv().as_bytes())?))?;
    if let Some(path) = &a.json {
        emit(Some(path), |w| gio::write_json(w, &report))?;
    }
    eprintln!("{} trials in {:.1} s", report.trials, report.runtime_secs);
    Ok(())
}
