use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsig")).args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gsig(args);
    assert!(out.status.success(), "gsig {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_vector(p: &Path) -> Vec<f64> {
    fs::read_to_string(p).unwrap().lines().filter(|l| !l.trim().is_empty()).map(|l| l.trim().parse().unwrap()).collect()
}

fn edges(p: &Path) -> Vec<(usize, usize, f64)> {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,w"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// A small geometric graph and `k` stationary signals on it.
fn fixture(dir: &TempDir, n: usize, k: usize, tau: f64) -> (PathBuf, PathBuf) {
    let g = path(dir, "g.csv");
    let x = path(dir, "x.csv");
    ok(&["--seed", "3", "graph", "geometric", "--n", &n.to_string(), "--k", "8", "-o", s(&g)]);
    let kernel = format!(r#"{{"type":"heat","tau":{tau}}}"#);
    ok(&["--seed", "4", "synth", "signals", "--graph", s(&g), "--kernel", &kernel, "-k", &k.to_string(), "-o", s(&x)]);
    (g, x)
}

#[test]
fn ring_has_one_edge_per_vertex() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "ring.csv");
    let res = ok(&["graph", "ring", "--n", "64", "-o", s(&out)]);
    assert_eq!(edges(&out).len(), 64);
    let stats: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(stats["n_edges"], 64);
}

#[test]
fn knn_edge_list_is_a_symmetric_graph() {
    let dir = TempDir::new().unwrap();
    let feats = path(&dir, "f.csv");
    let rows: String = (0..30).map(|i| format!("{},{}\n", (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
    fs::write(&feats, rows).unwrap();
    let out = path(&dir, "g.csv");
    ok(&["graph", "knn", "--features", s(&feats), "--k", "4", "-o", s(&out)]);
    let list = edges(&out);
    assert!(!list.is_empty());
    // Each undirected edge is listed once with i < j and a weight in (0, 1].
    let mut seen = std::collections::HashSet::new();
    for &(i, j, w) in &list {
        assert!(i < j && w > 0.0 && w <= 1.0);
        assert!(seen.insert((i, j)));
    }
    let mut degree = [0usize; 30];
    for &(i, j, _) in &list {
        degree[i] += 1;
        degree[j] += 1;
    }
    assert!(degree.iter().all(|&d| d >= 4));
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "i,j,w\n0,1,1.0\n1,x,2.0\n").unwrap();
    let out = gsig(&["graph", "build", "--edges", s(&bad), "-o", s(&path(&dir, "o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn psd_accepts_one_realization_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (g, x) = fixture(&dir, 80, 1, 0.5);
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    ok(&["--seed", "9", "psd", "--graph", s(&g), "--signals", s(&x), "-o", s(&a)]);
    ok(&["--seed", "9", "psd", "--graph", s(&g), "--signals", s(&x), "-o", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let est = json(&a);
    assert_eq!(est["meta"]["k1"], 1);
    assert_eq!(est["points"].as_array().unwrap().len(), 30);
}

#[test]
fn psd_exact_output_tracks_white_noise() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "g.csv");
    let x = path(&dir, "x.csv");
    ok(&["--seed", "1", "graph", "geometric", "--n", "100", "--k", "8", "-o", s(&g)]);
    ok(&["--seed", "2", "synth", "signals", "--graph", s(&g), "--kernel", r#"{"type":"constant","value":1.0}"#, "-k", "400", "-o", s(&x)]);
    let est = path(&dir, "est.json");
    let exact = path(&dir, "exact.json");
    ok(&["psd", "--graph", s(&g), "--signals", s(&x), "-m", "10", "--exact", s(&exact), "-o", s(&est)]);
    // For a flat PSD the bias oracle is 1 in every band; 400 realisations
    // keep the sampling error well below 15%.
    for p in json(&exact)["points"].as_array().unwrap() {
        let v = p[1].as_f64().unwrap();
        assert!((v - 1.0).abs() < 0.15, "exact-path band {v}");
    }
    for p in json(&est)["points"].as_array().unwrap() {
        let v = p[1].as_f64().unwrap();
        assert!((v - 1.0).abs() < 0.5, "probe-normalised band {v}");
    }
}

#[test]
fn psd_rejects_mismatched_signals() {
    let dir = TempDir::new().unwrap();
    let (g, _) = fixture(&dir, 40, 2, 0.5);
    let x = path(&dir, "short.csv");
    fs::write(&x, "1.0\n2.0\n").unwrap();
    let out = gsig(&["psd", "--graph", s(&g), "--signals", s(&x)]);
    assert_eq!(out.status.code(), Some(2));
}

fn write_problem(dir: &TempDir, body: &str) -> PathBuf {
    let p = path(dir, "problem.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn wiener_optimization_matches_the_filter_fast_path() {
    let dir = TempDir::new().unwrap();
    let (g, x) = fixture(&dir, 80, 1, 2.0);
    let problem = write_problem(
        &dir,
        r#"{"operator":{"type":"filter","kernel":{"type":"heat","tau":0.5}},
            "psd":{"type":"heat","tau":2.0},"noise":{"sigma2":0.01},
            "solver":{"eps":1e-20,"J":50000}}"#,
    );
    let y = path(&dir, "y.csv");
    ok(&["--seed", "5", "synth", "degrade", "--graph", s(&g), "--problem", s(&problem), "--signal", s(&x), "--sigma", "0.1", "-o", s(&y)]);
    let w = path(&dir, "w.csv");
    let f = path(&dir, "f.csv");
    let trace = path(&dir, "trace.json");
    ok(&["solve", "--method", "wiener", "--graph", s(&g), "--problem", s(&problem), "--y", s(&y), "--trace", s(&trace), "-o", s(&w)]);
    ok(&["solve", "--method", "filter", "--graph", s(&g), "--problem", s(&problem), "--y", s(&y), "-o", s(&f)]);
    let (w, f) = (read_vector(&w), read_vector(&f));
    let diff: f64 = w.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(diff / scale < 1e-6, "relative difference {}", diff / scale);

    let t = json(&trace);
    let obj: Vec<f64> = t["objective"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(t["iterations"].as_u64().unwrap() as usize, obj.len());
    let min = obj.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(obj.last().unwrap() - min <= 1e-9 * min.abs().max(1.0));
}

#[test]
fn missing_psd_is_reported_by_name() {
    let dir = TempDir::new().unwrap();
    let (g, _) = fixture(&dir, 30, 1, 1.0);
    let problem = write_problem(&dir, r#"{"operator":{"type":"identity"},"noise":{"sigma2":0.1}}"#);
    let y = path(&dir, "y.csv");
    fs::write(&y, "0.5\n".repeat(30)).unwrap();
    let out = gsig(&["solve", "--method", "wiener", "--graph", s(&g), "--problem", s(&problem), "--y", s(&y)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("psd"));
}

#[test]
fn infeasible_constraint_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let (g, _) = fixture(&dir, 30, 1, 1.0);
    // A band-limiting H cannot reach a y with high-frequency content at ε = 0.
    let problem = write_problem(&dir, r#"{"operator":{"type":"filter","kernel":{"type":"bandlimit","lambda_c":0.0}},"epsilon":0.0}"#);
    let y = path(&dir, "y.csv");
    let alternating: String = (0..30).map(|i| format!("{}\n", if i % 2 == 0 { 1.0 } else { -1.0 })).collect();
    fs::write(&y, alternating).unwrap();
    let out = gsig(&["solve", "--method", "tikhonov", "--graph", s(&g), "--problem", s(&problem), "--y", s(&y)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn stationary_signals_score_high() {
    let dir = TempDir::new().unwrap();
    let (g, x) = fixture(&dir, 100, 1000, 1.0);
    let report = path(&dir, "report.json");
    ok(&["stationarity", "--graph", s(&g), "--signals", s(&x), "-o", s(&report)]);
    let r = json(&report);
    let sr = r["s_r"].as_f64().unwrap();
    assert!(sr >= 0.95, "s_r = {sr}");
}

#[test]
fn stationarity_needs_two_realizations() {
    let dir = TempDir::new().unwrap();
    let (g, x) = fixture(&dir, 40, 1, 1.0);
    let out = gsig(&["stationarity", "--graph", s(&g), "--signals", s(&x)]);
    assert_eq!(out.status.code(), Some(2));
}

fn parse_report(csv: &str) -> Vec<(String, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,noise_std,mean_snr_db,stderr_db,trials"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5);
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn inpainting_report_keeps_the_wiener_ordering() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "inpaint.csv");
    let meta = path(&dir, "inpaint.json");
    ok(&["--seed", "7", "experiment", "inpaint", "--nodes", "400", "--mask", "0.5", "--trials", "20", "-o", s(&csv), "--json", s(&meta)]);
    let rows = parse_report(&fs::read_to_string(&csv).unwrap());
    let snr = |m: &str, sigma: f64| rows.iter().find(|r| r.0 == m && r.1 == sigma).unwrap().2;
    let levels: Vec<f64> = rows.iter().filter(|r| r.0 == "wiener").map(|r| r.1).collect();
    assert!(!levels.is_empty());
    for s in levels {
        assert!(snr("wiener", s) >= snr("tikhonov", s));
    }
    assert_eq!(json(&meta)["seed"], 7);
}

#[test]
fn deconvolution_report_is_plain_csv() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["experiment", "deconv", "--nodes", "300", "--trials", "2", "--noise", "0.01,0.05"]);
    let rows = parse_report(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.2.is_finite()));
    drop(dir);
}

#[test]
fn every_subcommand_has_help() {
    let commands: [&[&str]; 14] = [
        &[],
        &["graph"],
        &["graph", "build"],
        &["graph", "knn"],
        &["graph", "ring"],
        &["graph", "grid"],
        &["graph", "geometric"],
        &["synth", "signals"],
        &["synth", "degrade"],
        &["psd"],
        &["solve"],
        &["stationarity"],
        &["experiment"],
        &["synth"],
    ];
    for c in commands {
        let mut args = c.to_vec();
        args.push("--help");
        let out = ok(&args);
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"), "{args:?}");
    }
}
