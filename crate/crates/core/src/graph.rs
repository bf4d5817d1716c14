//! Combinatorial graphs, the three generator families, and metric graphs.
//!
//! Vertices are `0..V`. Edges are stored as unordered pairs `(u, v)` with
//! `u < v`, in the order the generator emitted them; an edge index always
//! refers to that order.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which closed-form family (if any) a graph was generated from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Complete(usize),
    CompleteBipartite(usize, usize),
    Circulant(usize, Vec<usize>),
    Custom,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::Complete(n) => format!("K{n}"),
            Family::CompleteBipartite(m, n) => format!("K{m},{n}"),
            Family::Circulant(n, a) => {
                let a: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                format!("C{n}({})", a.join(","))
            }
            Family::Custom => "custom".to_string(),
        }
    }
}

/// A simple undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    family: Family,
    lookup: HashMap<(usize, usize), usize>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a custom graph, rejecting loops, repeated edges and
    /// out-of-range endpoints.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::build(num_vertices, edges, Family::Custom)
    }

    fn build(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>, family: Family) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        let mut list = Vec::new();
        let mut lookup = HashMap::new();
        let mut degrees = vec![0; num_vertices];
        for (u, v) in edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::InvalidEdge(format!(
                    "edge ({u},{v}) out of range for {num_vertices} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidEdge(format!("loop at vertex {u}")));
            }
            let e = ordered(u, v);
            if lookup.insert(e, list.len()).is_some() {
                return Err(Error::InvalidEdge(format!("repeated edge ({},{})", e.0, e.1)));
            }
            degrees[u] += 1;
            degrees[v] += 1;
            list.push(e);
        }
        Ok(Graph {
            num_vertices,
            edges: list,
            degrees,
            family,
            lookup,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Option<(usize, usize)> {
        self.edges.get(index).copied()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.lookup.get(&ordered(u, v)).copied()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// First Betti number `E - V + 1`. Negative only for disconnected graphs.
    pub fn betti(&self) -> i64 {
        self.num_edges() as i64 - self.num_vertices as i64 + 1
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn component_count(&self) -> usize {
        let adj = self.neighbors();
        let mut seen = vec![false; self.num_vertices];
        let mut components = 0;
        for start in 0..self.num_vertices {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        components
    }

    /// Integer Laplacian `D - A`.
    pub fn laplacian_matrix(&self) -> DMatrix<i64> {
        let n = self.num_vertices;
        let mut l = DMatrix::<i64>::zeros(n, n);
        for &(u, v) in &self.edges {
            l[(u, u)] += 1;
            l[(v, v)] += 1;
            l[(u, v)] -= 1;
            l[(v, u)] -= 1;
        }
        l
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.num_vertices;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// Relabels vertex `v` as `perm[v]`. Edge order is preserved; the result
    /// is tagged `Custom` since family index conventions no longer hold.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.num_vertices;
        let mut hit = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut hit[p], true)) {
            return Err(Error::InvalidInput("relabeling is not a permutation".into()));
        }
        Graph::new(n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }
}

/// `K_n`: every pair of distinct vertices adjacent.
pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("complete graph needs n >= 2, got {n}")));
    }
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::build(n, edges, Family::Complete(n))
}

/// `K_{m,n}` with part A = `0..m` and part B = `m..m+n`.
pub fn complete_bipartite(m: usize, n: usize) -> Result<Graph> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "complete bipartite graph needs nonempty parts, got ({m},{n})"
        )));
    }
    let edges = (0..m).flat_map(|i| (0..n).map(move |j| (i, m + j)));
    Graph::build(m + n, edges, Family::CompleteBipartite(m, n))
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `C_n(a)`. Edges are emitted vertex by vertex as `(i, i + a_k mod n)`, so
/// edge index `i * p + k` lies in orbit `k` and index `k < p` is `(0, a_k)`.
pub fn circulant_graph(n: usize, a: &[usize]) -> Result<Graph> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("circulant needs at least one jump".into()));
    }
    if a[0] == 0 || a.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "circulant jumps must be strictly increasing and positive, got {a:?}"
        )));
    }
    if 2 * a[a.len() - 1] >= n {
        return Err(Error::UnsupportedParameter(format!(
            "circulant jumps must satisfy a_p < n/2 (n={n}, a={a:?})"
        )));
    }
    let g = a.iter().fold(n, |acc, &x| gcd(acc, x));
    if g != 1 {
        return Err(Error::DisconnectedGraph(format!("gcd(n, a) = {g} for C{n}{a:?}")));
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| a.iter().map(move |&ak| (i, (i + ak) % n)))
        .collect();
    Graph::build(n, edges, Family::Circulant(n, a.to_vec()))
}

/// Reference configuration of an equilateral or almost-equilateral graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub ell: f64,
    pub perturbed_edge: Option<usize>,
    pub epsilon: f64,
}

/// A graph with a positive length on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    graph: Graph,
    lengths: Vec<f64>,
    baseline: Option<Baseline>,
}

impl MetricGraph {
    /// Arbitrary lengths, no baseline recorded.
    pub fn with_lengths(graph: Graph, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != graph.num_edges() {
            return Err(Error::InvalidInput(format!(
                "{} lengths for {} edges",
                lengths.len(),
                graph.num_edges()
            )));
        }
        if let Some((i, l)) = lengths.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidLength(format!("edge {i} has length {l}")));
        }
        if graph.num_edges() == 0 {
            return Err(Error::InvalidLength("total length must be positive".into()));
        }
        Ok(MetricGraph {
            graph,
            lengths,
            baseline: None,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn baseline(&self) -> Option<&Baseline> {
        self.baseline.as_ref()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn mean_length(&self) -> f64 {
        self.total_length() / self.lengths.len() as f64
    }

    /// Baseline `ell` when recorded, otherwise the mean edge length.
    pub fn reference_length(&self) -> f64 {
        self.baseline.map_or_else(|| self.mean_length(), |b| b.ell)
    }

    /// Common length if every edge length agrees to relative `1e-12`.
    pub fn equilateral_length(&self) -> Option<f64> {
        let l0 = self.lengths[0];
        self.lengths.iter().all(|l| (l - l0).abs() <= 1e-12 * l0).then_some(l0)
    }
}

/// Equilateral metric graph with length `ell`, optionally with one edge
/// stretched to `ell + epsilon`.
pub fn make_metric(graph: &Graph, ell: f64, perturbation: Option<(usize, f64)>) -> Result<MetricGraph> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidLength(format!(
            "baseline length must be positive, got {ell}"
        )));
    }
    let mut lengths = vec![ell; graph.num_edges()];
    let (perturbed_edge, epsilon) = match perturbation {
        Some((e, eps)) => {
            if e >= graph.num_edges() {
                return Err(Error::InvalidEdge(format!(
                    "edge index {e} out of range ({} edges)",
                    graph.num_edges()
                )));
            }
            if !(ell + eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidLength(format!(
                    "perturbed length {ell} + {eps} must be positive"
                )));
            }
            lengths[e] = ell + eps;
            (Some(e), eps)
        }
        None => (None, 0.0),
    };
    let mut mg = MetricGraph::with_lengths(graph.clone(), lengths)?;
    mg.baseline = Some(Baseline {
        ell,
        perturbed_edge,
        epsilon,
    });
    Ok(mg)
}
