//! Weighted undirected graphs and the matrices derived from them.
//!
//! Every edge is oriented from its lower to its higher node index and the
//! edge list is kept sorted lexicographically, so an edge index `e` has the
//! same meaning in every matrix, vector and report produced by the crate.
//!
//! Conventions: `B` is the `n × m` oriented incidence matrix, `𝒜` the
//! diagonal matrix of edge weights, `L = B𝒜Bᵀ` the Laplacian and `L†` its
//! Moore–Penrose pseudoinverse.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Lower node index; `+1` row of the incidence column.
    pub source: usize,
    /// Higher node index; `-1` row of the incidence column.
    pub sink: usize,
    pub weight: f64,
}

/// On-disk shape: `{"n": 3, "edges": [[0, 1, 1.0], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Connected, simple, positively weighted undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    #[serde(skip)]
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::new(file.n, &file.edges)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.source, e.sink, e.weight)).collect(),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl Graph {
    /// Builds a graph from `(i, j, weight)` triples. Endpoints may be given in
    /// either order; the stored orientation is always low → high.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { node: a });
            }
            let (i, j) = (a.min(b), a.max(b));
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonpositiveWeight { i, j, weight: w });
            }
            canon.push(Edge {
                source: i,
                sink: j,
                weight: w,
            });
        }
        canon.sort_by(|x, y| (x.source, x.sink).cmp(&(y.source, y.sink)));
        for pair in canon.windows(2) {
            if pair[0].source == pair[1].source && pair[0].sink == pair[1].sink {
                return Err(Error::DuplicateEdge {
                    i: pair[0].source,
                    j: pair[0].sink,
                });
            }
        }
        let mut uf = UnionFind::new(n);
        let mut components = n;
        for e in &canon {
            if uf.union(e.source, e.sink) {
                components -= 1;
            }
        }
        if components != 1 {
            return Err(Error::Disconnected);
        }
        let mut neighbors = vec![Vec::new(); n];
        for (idx, e) in canon.iter().enumerate() {
            neighbors[e.source].push((e.sink, idx));
            neighbors[e.sink].push((e.source, idx));
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            neighbors,
        })
    }

    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = pairs.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Graph::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::unweighted(n, &pairs)
    }

    /// Cycle graph `Cₙ`, `n ≥ 3`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::DomainError(format!("ring needs n >= 3, got {n}")));
        }
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::unweighted(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        Graph::unweighted(n, &pairs)
    }

    /// Star centred at node 0.
    pub fn star(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Graph::unweighted(n, &pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted `(neighbor, edge index)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.neighbors[node]
    }

    pub fn weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.edges.iter().map(|e| e.weight))
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.m() + 1 == self.n
    }

    pub fn is_complete(&self) -> bool {
        self.m() == self.n * (self.n - 1) / 2
    }

    pub fn is_ring(&self) -> bool {
        self.n >= 3 && self.m() == self.n && self.neighbors.iter().all(|l| l.len() == 2)
    }

    /// Largest weighted degree, i.e. the max row sum of the adjacency matrix.
    pub fn max_weighted_degree(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.neighbors[i]
                    .iter()
                    .map(|&(_, e)| self.edges[e].weight)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.m());
        for (k, e) in self.edges.iter().enumerate() {
            b[(e.source, k)] = 1.0;
            b[(e.sink, k)] = -1.0;
        }
        b
    }

    /// `Bᵀx`: the per-edge differences `x_source − x_sink`.
    pub fn edge_differences(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.edges.iter().map(|e| x[e.source] - x[e.sink]),
        )
    }

    /// `B𝒜v` for an edge vector `v`.
    pub fn weighted_divergence(&self, v: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (e, &ve) in self.edges.iter().zip(v) {
            let flow = e.weight * ve;
            out[e.source] += flow;
            out[e.sink] -= flow;
        }
        out
    }

    /// `L_v = B𝒜 diag(v) Bᵀ`.
    pub fn scaled_laplacian(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        if v.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: v.len(),
            });
        }
        let mut l = DMatrix::zeros(self.n, self.n);
        for (e, &ve) in self.edges.iter().zip(v) {
            let w = e.weight * ve;
            let (i, j) = (e.source, e.sink);
            l[(i, i)] += w;
            l[(j, j)] += w;
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        Ok(l)
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        self.scaled_laplacian(&vec![1.0; self.m()])
            .expect("length matches by construction")
    }

    pub fn laplacian_bundle(&self) -> Result<LaplacianBundle> {
        LaplacianBundle::new(self)
    }

    pub fn verify_decomposition(&self) -> Result<DecompositionReport> {
        let b = self.incidence_matrix();
        let ba = &b * DMatrix::from_diagonal(&self.weights());
        let bt = b.transpose();
        let cutset_dim = linalg::rank(&bt);
        let cycle_dim = self.m() - linalg::rank(&ba);
        let range = linalg::orth_range(&bt)?;
        let kernel = linalg::null_space(&ba)?;
        let cos = linalg::max_principal_cosine(&range, &kernel);
        Ok(DecompositionReport {
            cutset_dim,
            cycle_dim,
            min_angle: cos.acos(),
        })
    }
}

/// Laplacian with its sorted spectrum and pseudoinverse.
#[derive(Debug, Clone)]
pub struct LaplacianBundle {
    pub laplacian: DMatrix<f64>,
    pub pinv: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl LaplacianBundle {
    pub fn new(g: &Graph) -> Result<Self> {
        let laplacian = g.laplacian();
        let (eigenvalues, eigenvectors) = linalg::sym_eigen_sorted(&laplacian)?;
        let tol = linalg::zero_threshold(&eigenvalues);
        let zeros = eigenvalues.iter().filter(|x| x.abs() <= tol).count();
        if zeros != 1 {
            return Err(Error::EigSolveFailure(format!(
                "expected a single zero Laplacian eigenvalue, found {zeros}"
            )));
        }
        let pinv = linalg::pinv_from_eigen(&eigenvalues, &eigenvectors);
        Ok(LaplacianBundle {
            laplacian,
            pinv,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Algebraic connectivity λ₂(L). Zero for the single-node graph.
    pub fn fiedler_value(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn fiedler_vector(&self) -> Option<DVector<f64>> {
        (self.eigenvalues.len() > 1).then(|| self.eigenvectors.column(1).into_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `dim Img(Bᵀ)`.
    pub cutset_dim: usize,
    /// `dim Ker(B𝒜)`.
    pub cycle_dim: usize,
    /// Smallest principal angle between the two subspaces; `π/2` when the
    /// cycle space is trivial.
    pub min_angle: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centering(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
    }

    #[test]
    fn smallest_connected_graph() {
        let g = Graph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.incidence_matrix(), DMatrix::from_row_slice(2, 1, &[1.0, -1.0]));
    }

    #[test]
    fn triangle_incidence_columns() {
        let g = Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(g.m(), 3);
        let b = g.incidence_matrix();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            1.0, 1.0, 0.0,
            -1.0, 0.0, 1.0,
            0.0, -1.0, -1.0,
        ]);
        assert_eq!(b, expected);
    }

    #[test]
    fn star_incidence_columns() {
        let g = Graph::star(3).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 2, &[
            1.0, 1.0,
            -1.0, 0.0,
            0.0, -1.0,
        ]);
        assert_eq!(g.incidence_matrix(), expected);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Graph::new(3, &[(0, 1, 1.0)]),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            Graph::new(2, &[(1, 1, 1.0), (0, 1, 1.0)]),
            Err(Error::SelfLoop { node: 1 })
        ));
        assert!(matches!(
            Graph::new(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge { i: 0, j: 1 })
        ));
        assert!(matches!(
            Graph::new(2, &[(0, 1, 0.0)]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::new(2, &[(0, 2, 1.0)]),
            Err(Error::NodeOutOfRange { node: 2, n: 2 })
        ));
        assert!(matches!(Graph::new(0, &[]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn edges_are_canonical_and_sorted() {
        let g = Graph::new(3, &[(2, 1, 1.0), (1, 0, 2.0)]).unwrap();
        let e: Vec<_> = g.edges().iter().map(|e| (e.source, e.sink)).collect();
        assert_eq!(e, vec![(0, 1), (1, 2)]);
        assert_eq!(g.edges()[0].weight, 2.0);
    }

    #[test]
    fn path_two_pseudoinverse_is_quarter_laplacian() {
        let g = Graph::path(2).unwrap();
        let lb = g.laplacian_bundle().unwrap();
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(lb.laplacian, l);
        assert!((&lb.pinv - &l / 4.0).abs().max() < 1e-14);
        // L·L† = I₂ − ½11ᵀ by direct multiplication.
        assert!((&lb.laplacian * &lb.pinv - centering(2)).abs().max() < 1e-14);
    }

    #[test]
    fn triangle_spectrum() {
        let lb = Graph::complete(3).unwrap().laplacian_bundle().unwrap();
        let expected = [0.0, 3.0, 3.0];
        for (a, b) in lb.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_graph_pseudoinverse_closed_form() {
        for n in 2..9 {
            let lb = Graph::complete(n).unwrap().laplacian_bundle().unwrap();
            let expected = centering(n) / n as f64;
            assert!((&lb.pinv - expected).abs().max() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn scaled_laplacian_cases() {
        let g = Graph::complete(4).unwrap();
        assert_eq!(g.scaled_laplacian(&[1.0; 6]).unwrap(), g.laplacian());
        assert_eq!(g.scaled_laplacian(&[0.0; 6]).unwrap(), DMatrix::zeros(4, 4));
        let p2 = Graph::path(2).unwrap();
        assert_eq!(
            p2.scaled_laplacian(&[0.5]).unwrap(),
            DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])
        );
        assert!(matches!(
            g.scaled_laplacian(&[1.0; 3]),
            Err(Error::DimensionMismatch { expected: 6, found: 3 })
        ));
    }

    #[test]
    fn decomposition_dimensions() {
        let tri = Graph::complete(3).unwrap().verify_decomposition().unwrap();
        assert_eq!((tri.cutset_dim, tri.cycle_dim), (2, 1));
        assert!(tri.min_angle > 0.0);
        let tree = Graph::star(5).unwrap().verify_decomposition().unwrap();
        assert_eq!((tree.cutset_dim, tree.cycle_dim), (4, 0));
        let k4 = Graph::complete(4).unwrap().verify_decomposition().unwrap();
        assert_eq!((k4.cutset_dim, k4.cycle_dim), (3, 3));
    }

    #[test]
    fn graph_json_round_trip_validates() {
        let g: Graph = serde_json::from_str(r#"{"n": 3, "edges": [[0, 1, 1.0], [2, 1, 2.5]]}"#)
            .unwrap();
        assert_eq!(g.m(), 2);
        let back: Graph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"n": 3, "edges": [[0, 1, 1.0]]}"#).is_err());
    }
}
