//! File formats: edge-list, feature and signal CSV, and the JSON documents
//! exchanged with the command-line tool.
//!
//! * Edge lists: header `i,j,w`, one undirected edge per row, 0-based indices.
//! * Features and signal matrices: no header, one vertex per row.
//! * Vectors: one value per line, no header.
//!
//! Parse failures report the 1-based line of the offending record.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;
use crate::spectral::{FilterEngine, Kernel};
use crate::wiener::{FistaOptions, FistaOutcome, Mask, Mean, Operator};

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            Error::Parse { line, message: format!("expected {expected_len} fields, found {len}") }
        }
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

fn parse_field<F: std::str::FromStr>(rec: &csv::StringRecord, k: usize, what: &str) -> Result<F> {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let raw = rec.get(k).ok_or_else(|| Error::Parse { line, message: format!("missing field `{what}`") })?;
    raw.trim().parse().map_err(|_| Error::Parse { line, message: format!("cannot parse `{}` as {what}", raw.trim()) })
}

/// Parsed edge list. `n` is one more than the largest index seen.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList<T> {
    pub n: usize,
    pub edges: Vec<(usize, usize, T)>,
}

impl<T: Real> EdgeList<T> {
    /// Builds the graph, optionally with more vertices than the edges mention.
    pub fn into_graph(self, n_vertices: Option<usize>) -> Result<Graph<T>> {
        let n = n_vertices.unwrap_or(self.n).max(self.n);
        Graph::from_edge_list(n, &self.edges)
    }
}

pub fn read_edge_list<T: Real, R: Read>(reader: R) -> Result<EdgeList<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["i", "j", "w"] {
        return Err(Error::Parse { line: 1, message: format!("expected header `i,j,w`, found `{}`", names.join(",")) });
    }
    let mut edges = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let i: usize = parse_field(&rec, 0, "vertex index i")?;
        let j: usize = parse_field(&rec, 1, "vertex index j")?;
        let w: f64 = parse_field(&rec, 2, "weight w")?;
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, T::c(w)));
    }
    Ok(EdgeList { n, edges })
}

pub fn write_edge_list<T: Real, W: Write>(writer: W, graph: &Graph<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "w"]).map_err(csv_error)?;
    for e in graph.edges() {
        w.write_record([e.i.to_string(), e.j.to_string(), e.w.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a rectangular numeric table without header.
pub fn read_matrix<T: Real, R: Read>(reader: R) -> Result<Array2<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::Parse { line, message: format!("expected {c} fields, found {}", rec.len()) })
            }
            _ => {}
        }
        for k in 0..rec.len() {
            let v: f64 = parse_field(&rec, k, "a number")?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: "non-finite value".into() });
            }
            data.push(T::c(v));
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse { line: 0, message: "no data rows".into() })?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("rows have equal length"))
}

pub fn write_matrix<T: Real, W: Write>(writer: W, m: &Array2<T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector stored one value per line (or as a single-column table).
pub fn read_vector<T: Real, R: Read>(reader: R) -> Result<Array1<T>> {
    let m: Array2<T> = read_matrix(reader)?;
    if m.ncols() != 1 {
        return Err(Error::Parse { line: 1, message: format!("expected a single column, found {}", m.ncols()) });
    }
    Ok(m.column(0).to_owned())
}

pub fn write_vector<T: Real, W: Write>(writer: W, v: &Array1<T>) -> Result<()> {
    write_matrix(writer, &v.view().insert_axis(ndarray::Axis(1)).to_owned())
}

pub fn read_json<D: serde::de::DeserializeOwned, R: Read>(reader: R) -> Result<D> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse { line: e.line() as u64, message: e.to_string() })
}

pub fn write_json<S: Serialize, W: Write>(mut writer: W, value: &S) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value).map_err(|e| Error::Io(e.to_string()))?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Measurement operator as written in a problem file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Real")]
pub enum OperatorSpec<T> {
    Identity,
    Mask { indices: Vec<usize> },
    Filter { kernel: Kernel<T> },
    MaskedFilter { indices: Vec<usize>, kernel: Kernel<T> },
}

impl<T: Real> OperatorSpec<T> {
    pub fn build(&self, engine: &FilterEngine<T>) -> Result<Operator<T>> {
        let n = engine.n();
        Ok(match self {
            OperatorSpec::Identity => Operator::identity(n),
            OperatorSpec::Mask { indices } => Operator::mask(Mask::new(n, indices.clone())?),
            OperatorSpec::Filter { kernel } => {
                kernel.validate()?;
                Operator::filter(engine.clone(), kernel.clone())
            }
            OperatorSpec::MaskedFilter { indices, kernel } => {
                kernel.validate()?;
                Operator::masked_filter(Mask::new(n, indices.clone())?, engine.clone(), kernel.clone())?
            }
        })
    }
}

/// Noise model: `{"sigma2": v}` for white noise or any kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Real")]
pub enum NoiseSpec<T> {
    White { sigma2: T },
    Kernel(Kernel<T>),
}

impl<T: Real> NoiseSpec<T> {
    pub fn kernel(&self) -> Kernel<T> {
        match self {
            NoiseSpec::White { sigma2 } => Kernel::constant(*sigma2),
            NoiseSpec::Kernel(k) => k.clone(),
        }
    }

    /// The variance when the noise is white.
    pub fn sigma2(&self) -> Option<T> {
        match self {
            NoiseSpec::White { sigma2 } => Some(*sigma2),
            NoiseSpec::Kernel(k) => k.as_constant(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Real")]
pub enum MeanSpec<T> {
    Scalar(T),
    Vector(Vec<T>),
}

impl<T: Real> From<&MeanSpec<T>> for Mean<T> {
    fn from(m: &MeanSpec<T>) -> Self {
        match m {
            MeanSpec::Scalar(c) => Mean::Scalar(*c),
            MeanSpec::Vector(v) => Mean::Vector(Array1::from(v.clone())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct SolverSpec<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<T>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<T>,
}

impl<T: Real> SolverSpec<T> {
    pub fn fista_options(&self) -> FistaOptions<T> {
        let d = FistaOptions::default();
        FistaOptions {
            beta: self.beta,
            eps: self.eps.unwrap_or(d.eps),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            delta: self.delta.unwrap_or(d.delta),
            x0: None,
        }
    }
}

/// Inverse-problem description read by `gsig solve`.
///
/// Fields a method does not use may be omitted; [`ProblemSpec::psd`] and
/// [`ProblemSpec::noise`] report the missing field by name when required.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProblemSpec<T> {
    pub operator: OperatorSpec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<Kernel<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanSpec<T>>,
    /// Constraint radius for the Tikhonov and TV models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<T>,
    #[serde(default)]
    pub solver: SolverSpec<T>,
}

impl<T: Real> ProblemSpec<T> {
    pub fn psd(&self) -> Result<Kernel<T>> {
        let k = self.psd.clone().ok_or_else(|| missing("psd"))?;
        k.validate()?;
        Ok(k)
    }

    pub fn noise(&self) -> Result<&NoiseSpec<T>> {
        self.noise.as_ref().ok_or_else(|| missing("noise"))
    }

    pub fn epsilon(&self) -> Result<T> {
        self.epsilon.ok_or_else(|| missing("epsilon"))
    }

    pub fn mean(&self) -> Mean<T> {
        self.mean.as_ref().map(Mean::from).unwrap_or_default()
    }
}

fn missing(field: &str) -> Error {
    Error::InvalidParameter(format!("problem is missing the required field `{field}`"))
}

/// Iteration record written next to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> From<&FistaOutcome<T>> for SolverTrace {
    fn from(o: &FistaOutcome<T>) -> Self {
        Self {
            objective: o.objective.iter().map(|v| v.to_f64_lossy()).collect(),
            iterations: o.iterations,
            converged: o.converged,
        }
    }
}
