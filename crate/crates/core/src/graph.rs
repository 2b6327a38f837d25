//! Weighted undirected graphs, the combinatorial Laplacian and the graph
//! gradient.

use std::collections::VecDeque;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, stream};
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

/// Undirected weighted edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub w: T,
}

/// Weighted undirected graph without self-loops.
///
/// Edges are kept sorted by `(i, j)` and mirrored into per-vertex adjacency
/// lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    adjacency: Vec<Vec<(usize, T)>>,
    degrees: Array1<T>,
}

impl<T: Real> Graph<T> {
    /// Builds a graph from `(i, j, w)` triples. Each unordered pair may appear
    /// once, in either orientation.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { i: a, j: b, w: w.to_f64_lossy() });
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            normalized.push(Edge { i, j, w });
        }
        normalized.sort_by_key(|e| (e.i, e.j));
        for pair in normalized.windows(2) {
            if pair[0].i == pair[1].i && pair[0].j == pair[1].j {
                return Err(Error::DuplicateEdge { i: pair[0].i, j: pair[0].j });
            }
        }
        Ok(Self::from_sorted_unique(n, normalized))
    }

    fn from_sorted_unique(n: usize, edges: Vec<Edge<T>>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut degrees = Array1::zeros(n);
        for e in &edges {
            adjacency[e.i].push((e.j, e.w));
            adjacency[e.j].push((e.i, e.w));
            degrees[e.i] += e.w;
            degrees[e.j] += e.w;
        }
        for list in adjacency.iter_mut() {
            list.sort_by_key(|&(v, _)| v);
        }
        Self { n, edges, adjacency, degrees }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// `(neighbor, weight)` pairs of vertex `v`, sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, T)] {
        &self.adjacency[v]
    }

    pub fn degrees(&self) -> ArrayView1<'_, T> {
        self.degrees.view()
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        match self.adjacency[i].binary_search_by_key(&j, |&(v, _)| v) {
            Ok(k) => self.adjacency[i][k].1,
            Err(_) => T::zero(),
        }
    }

    /// Dense symmetric weight matrix.
    pub fn weight_matrix(&self) -> Array2<T> {
        let mut w = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            w[[e.i, e.j]] = e.w;
            w[[e.j, e.i]] = e.w;
        }
        w
    }

    /// Number of connected components (isolated vertices count as one each).
    pub fn connected_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &(u, _) in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        count
    }

    /// Hop distance from `source` to every vertex (`usize::MAX` if unreachable).
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Kernel width for [`knn_graph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma2<T> {
    Fixed(T),
    /// Mean of the squared distances of the retained edges.
    Auto,
}

/// Symmetrised k-nearest-neighbour graph with weights `exp(-d² / σ²)`.
///
/// Vertex `n` is linked to `i` when either selects the other among its `k`
/// nearest rows (ties broken by index).
pub fn knn_graph<T: Real>(features: ArrayView2<T>, k: usize, sigma2: Sigma2<T>) -> Result<Graph<T>> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::DegenerateFeatures(format!("need at least 2 rows, got {n}")));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} must be smaller than the number of rows {n}")));
    }
    if let Sigma2::Fixed(s) = sigma2 {
        if !(s > T::zero()) {
            return Err(Error::InvalidParameter("sigma2 must be positive".into()));
        }
    }
    let rows: Vec<ArrayView1<T>> = features.axis_iter(Axis(0)).collect();
    let neighbours: Vec<Vec<(usize, T)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(T, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2 = rows[i]
                        .iter()
                        .zip(rows[j].iter())
                        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
                    (d2, j)
                })
                .collect();
            let by_dist = |a: &(T, usize), b: &(T, usize)| {
                a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
            };
            if k < cand.len() {
                cand.select_nth_unstable_by(k, by_dist);
                cand.truncate(k);
            }
            cand.into_iter().map(|(d2, j)| (j, d2)).collect()
        })
        .collect();

    let mut pairs: Vec<(usize, usize, T)> = Vec::with_capacity(n * k);
    for (i, list) in neighbours.iter().enumerate() {
        for &(j, d2) in list {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            pairs.push((a, b, d2));
        }
    }
    pairs.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    pairs.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);

    let width = match sigma2 {
        Sigma2::Fixed(s) => s,
        Sigma2::Auto => {
            let mean = if pairs.is_empty() {
                T::zero()
            } else {
                pairs.iter().map(|p| p.2).sum::<T>() / T::from_usize_lossy(pairs.len())
            };
            if mean > T::zero() {
                mean
            } else {
                T::one()
            }
        }
    };
    let edges = pairs
        .into_iter()
        .map(|(i, j, d2)| Edge { i, j, w: (-d2 / width).exp().max(T::min_positive_value()) })
        .collect();
    Ok(Graph::from_sorted_unique(n, edges))
}

/// Unit-weight cycle on `n ≥ 3` vertices.
pub fn ring_graph<T: Real>(n: usize) -> Result<Graph<T>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("ring needs n >= 3, got {n}")));
    }
    let edges: Vec<(usize, usize, T)> = (0..n).map(|i| (i, (i + 1) % n, T::one())).collect();
    Graph::from_edge_list(n, &edges)
}

/// Unit-weight 4-connected grid; vertex `(r, c)` has index `r * cols + c`.
pub fn grid_graph<T: Real>(rows: usize, cols: usize) -> Result<Graph<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("grid dimensions must be positive".into()));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, T::one()));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, T::one()));
            }
        }
    }
    Graph::from_edge_list(rows * cols, &edges)
}

/// Uniform points in the unit square drawn from `seed`, as an `n × 2` matrix.
pub fn random_points<T: Real>(n: usize, seed: u64) -> Array2<T> {
    let mut rng = rng::rng_for(seed, stream::GRAPH, 0);
    Array2::from_shape_simple_fn((n, 2), || T::c(rng.random::<f64>()))
}

/// k-NN graph with exponential weights over uniform random points in the
/// unit square.
pub fn random_geometric_graph<T: Real>(n: usize, k: usize, seed: u64) -> Result<Graph<T>> {
    let pts = random_points::<T>(n, seed);
    knn_graph(pts.view(), k, Sigma2::Auto)
}

/// Combinatorial Laplacian `L = D - W` with a cached spectral upper bound.
#[derive(Debug, Clone)]
pub struct Laplacian<T> {
    graph: Arc<Graph<T>>,
    matrix: CsrMatrix<T>,
    lambda_max: T,
}

const LANCZOS_STEPS: usize = 60;
const LAMBDA_MAX_SAFETY: f64 = 1.01;

impl<T: Real> Laplacian<T> {
    pub fn new(graph: impl Into<Arc<Graph<T>>>) -> Self {
        let graph = graph.into();
        let n = graph.n_vertices();
        let mut triplets = Vec::with_capacity(n + 2 * graph.n_edges());
        for (v, &d) in graph.degrees().iter().enumerate() {
            triplets.push((v, v, d));
        }
        for e in graph.edges() {
            triplets.push((e.i, e.j, -e.w));
            triplets.push((e.j, e.i, -e.w));
        }
        let matrix = CsrMatrix::from_triplets(n, n, &triplets);
        let mut lap = Self { graph, matrix, lambda_max: T::zero() };
        lap.lambda_max = lap.estimate_lambda_max();
        lap
    }

    /// Largest Ritz value of a fully reorthogonalised Lanczos run, padded by
    /// its residual and a 1.01 safety factor, and capped by the
    /// Anderson–Morley bound `max over edges of d_i + d_j`.
    ///
    /// Plain power iteration can stop several percent short when the top of
    /// the spectrum is crowded, which Chebyshev filtering cannot tolerate.
    fn estimate_lambda_max(&self) -> T {
        let n = self.graph.n_vertices();
        let d = self.graph.degrees();
        let cap = self.graph.edges().iter().fold(T::zero(), |m, e| m.max(d[e.i] + d[e.j]));
        if cap == T::zero() {
            return T::zero();
        }
        let steps = n.min(LANCZOS_STEPS);
        let mut rng = rng::rng_for(0x5eed, stream::PROBE, u64::MAX);
        let mut random_unit = |basis: &[Array1<T>]| -> Option<Array1<T>> {
            for _ in 0..8 {
                let mut v: Array1<T> = Array1::from_shape_simple_fn(n, || T::c(rng.random::<f64>() - 0.5));
                orthogonalize(&mut v, basis);
                let nv = v.dot(&v).sqrt();
                if nv > T::c(1e-8) {
                    return Some(v / nv);
                }
            }
            None
        };

        let mut basis: Vec<Array1<T>> = Vec::with_capacity(steps);
        let mut alpha = Vec::with_capacity(steps);
        let mut beta: Vec<T> = Vec::with_capacity(steps);
        let mut q = random_unit(&basis).expect("n ≥ 1");
        let mut last_beta = T::zero();
        while basis.len() < steps {
            let mut w = self.matrix.mul_vec(q.view());
            alpha.push(q.dot(&w));
            basis.push(q);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &basis);
            let b = w.dot(&w).sqrt();
            last_beta = b;
            if basis.len() == steps {
                break;
            }
            if b > T::c(1e-10) * cap {
                beta.push(b);
                q = w / b;
            } else {
                // Invariant subspace (e.g. one connected component): restart
                // in the orthogonal complement with a decoupled block.
                match random_unit(&basis) {
                    Some(v) => {
                        beta.push(T::zero());
                        q = v;
                    }
                    None => break,
                }
            }
        }

        let m = alpha.len();
        let mut t = Array2::zeros((m, m));
        for i in 0..m {
            t[[i, i]] = alpha[i];
            if i + 1 < m {
                t[[i, i + 1]] = beta[i];
                t[[i + 1, i]] = beta[i];
            }
        }
        let Ok((ritz, vecs)) = crate::linalg::symmetric_eigen(t.view()) else {
            return cap;
        };
        let top = ritz.iter().copied().fold(T::neg_infinity(), T::max);
        let idx = ritz.iter().position(|&r| r == top).unwrap_or(0);
        let residual = if m < n { last_beta * vecs[[m - 1, idx]].abs() } else { T::zero() };
        ((top + residual) * T::c(LAMBDA_MAX_SAFETY)).min(cap)
    }

    pub fn graph(&self) -> &Graph<T> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    /// Upper bound on the largest eigenvalue.
    pub fn lambda_max(&self) -> T {
        self.lambda_max
    }

    /// Replaces the cached bound, e.g. with an exact value from an
    /// eigendecomposition.
    pub fn with_lambda_max(mut self, lambda_max: T) -> Self {
        self.lambda_max = lambda_max;
        self
    }

    pub fn apply(&self, x: ArrayView1<T>) -> Array1<T> {
        self.matrix.mul_vec(x)
    }

    pub fn apply_mat(&self, x: ArrayView2<T>) -> Array2<T> {
        self.matrix.mul_mat(x)
    }

    pub fn quadratic_form(&self, x: ArrayView1<T>) -> T {
        self.graph.edges().iter().map(|e| e.w * (x[e.i] - x[e.j]).powi(2)).sum()
    }

    pub fn to_dense(&self) -> Array2<T> {
        self.matrix.to_dense()
    }
}

fn orthogonalize<T: Real>(v: &mut Array1<T>, basis: &[Array1<T>]) {
    for b in basis {
        let c = b.dot(v);
        v.scaled_add(-c, b);
    }
}

pub fn laplacian<T: Real>(g: &Graph<T>) -> Laplacian<T> {
    Laplacian::new(g.clone())
}

/// Edge-by-vertex difference operator with `‖∇x‖² = xᵀ L x`.
///
/// Row `e` of edge `(i, j, w)` holds `+√w` at `i` and `-√w` at `j`; rows
/// follow the sorted edge order of the graph.
#[derive(Debug, Clone)]
pub struct GradientOperator<T> {
    matrix: CsrMatrix<T>,
    norm_sq_bound: T,
}

impl<T: Real> GradientOperator<T> {
    pub fn new(g: &Graph<T>) -> Self {
        let mut triplets = Vec::with_capacity(2 * g.n_edges());
        for (row, e) in g.edges().iter().enumerate() {
            let s = e.w.sqrt();
            triplets.push((row, e.i, s));
            triplets.push((row, e.j, -s));
        }
        let matrix = CsrMatrix::from_triplets(g.n_edges(), g.n_vertices(), &triplets);
        // ‖∇‖² = λ_max(L) ≤ 2 max degree.
        let norm_sq_bound = g.degrees().iter().fold(T::zero(), |m, &d| m.max(d)) * T::c(2.0);
        Self { matrix, norm_sq_bound }
    }

    pub fn n_edges(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_vertices(&self) -> usize {
        self.matrix.cols()
    }

    pub fn apply(&self, x: ArrayView1<T>) -> Array1<T> {
        self.matrix.mul_vec(x)
    }

    pub fn adjoint(&self, y: ArrayView1<T>) -> Array1<T> {
        self.matrix.mul_vec_transpose(y)
    }

    /// Upper bound on `‖∇‖₂²`.
    pub fn norm_sq_bound(&self) -> T {
        self.norm_sq_bound
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }
}

pub fn gradient_operator<T: Real>(g: &Graph<T>) -> GradientOperator<T> {
    GradientOperator::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn path_graph_degrees() {
        let g = Graph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.degrees().to_vec(), vec![1.0, 2.0, 1.0]);
        assert_eq!(g.weight(2, 1), 1.0);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Graph::from_edge_list(3, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge { i: 0, j: 1 })
        );
        assert_eq!(Graph::from_edge_list(2, &[(0, 0, 1.0)]), Err(Error::SelfLoop(0)));
        assert_eq!(Graph::from_edge_list(2, &[(0, 2, 1.0)]), Err(Error::IndexOutOfRange { index: 2, n: 2 }));
        assert!(matches!(Graph::from_edge_list(2, &[(0, 1, 0.0)]), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(Graph::from_edge_list(2, &[(0, 1, -1.0)]), Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn isolated_vertices_are_allowed() {
        let g = Graph::from_edge_list(4, &[(0, 1, 2.0)]).unwrap();
        assert_eq!(g.degrees().to_vec(), vec![2.0, 2.0, 0.0, 0.0]);
        assert_eq!(g.connected_components(), 3);
    }

    #[test]
    fn knn_line_example() {
        let f = array![[0.0], [1.0], [3.0]];
        let g = knn_graph(f.view(), 1, Sigma2::Fixed(1.0)).unwrap();
        assert_eq!(g.n_edges(), 2);
        let e = g.edges();
        assert_eq!((e[0].i, e[0].j), (0, 1));
        assert!((e[0].w - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[0].w - 0.3679).abs() < 1e-4);
        assert_eq!((e[1].i, e[1].j), (1, 2));
        assert!((e[1].w - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn knn_identical_rows() {
        let f = array![[1.0, 2.0], [1.0, 2.0]];
        let g = knn_graph(f.view(), 1, Sigma2::Fixed(1.0)).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.edges()[0].w, 1.0);
        let g = knn_graph(f.view(), 1, Sigma2::Auto).unwrap();
        assert_eq!(g.edges()[0].w, 1.0);
        assert!(matches!(knn_graph(array![[1.0]].view(), 0, Sigma2::Auto), Err(Error::DegenerateFeatures(_))));
        assert!(matches!(knn_graph(f.view(), 2, Sigma2::Auto), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn knn_auto_width_is_mean_sq_distance() {
        let f = array![[0.0], [1.0], [3.0]];
        let g = knn_graph(f.view(), 1, Sigma2::Auto).unwrap();
        // retained squared distances 1 and 4, mean 2.5
        assert!((g.edges()[0].w - (-1.0f64 / 2.5).exp()).abs() < 1e-15);
        assert!((g.edges()[1].w - (-4.0f64 / 2.5).exp()).abs() < 1e-15);
    }

    #[test]
    fn grid_one_row_is_path() {
        let g = grid_graph::<f64>(1, 5).unwrap();
        let p = Graph::from_edge_list(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        assert_eq!(g, p);
        assert_eq!(grid_graph::<f64>(3, 4).unwrap().n_edges(), 3 * 3 + 2 * 4);
    }

    #[test]
    fn ring_rejects_small() {
        assert!(ring_graph::<f64>(2).is_err());
        assert_eq!(ring_graph::<f64>(64).unwrap().n_edges(), 64);
    }

    #[test]
    fn geometric_graph_is_seeded() {
        let a = random_geometric_graph::<f64>(100, 10, 3).unwrap();
        let b = random_geometric_graph::<f64>(100, 10, 3).unwrap();
        let c = random_geometric_graph::<f64>(100, 10, 4).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_ne!(a.edges(), c.edges());
        assert!(a.degrees().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn path_laplacian_dense() {
        let g = Graph::from_edge_list(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let l = laplacian(&g);
        assert_eq!(l.to_dense(), array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]);
    }

    #[test]
    fn ring4_lambda_max_bound() {
        let l = laplacian(&ring_graph::<f64>(4).unwrap());
        assert!(l.lambda_max() >= 4.0 && l.lambda_max() <= 4.4, "{}", l.lambda_max());
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let g = random_geometric_graph::<f64>(60, 5, 1).unwrap();
        let l = laplacian(&g);
        let y = l.apply(Array1::ones(60).view());
        assert!(y.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn gradient_small_cases() {
        let g = Graph::from_edge_list(2, &[(0, 1, 1.0)]).unwrap();
        let grad = gradient_operator(&g);
        let x = array![0.0, 1.0];
        let gx = grad.apply(x.view());
        assert_eq!(gx.dot(&gx), 1.0);
        assert_eq!(laplacian(&g).quadratic_form(x.view()), 1.0);
        let c = grad.apply(Array1::from_elem(2, 3.5).view());
        assert!(c.iter().all(|&v| v == 0.0));
    }
}
