//! Communication graphs, weight matrices and Laplacian spectra.
//!
//! Nodes are indexed `0..n`. Every graph carries its self-loops implicitly:
//! [`Graph::neighborhood`] always contains the node itself, and the
//! neighbor lists returned by [`Graph::neighbors`] exclude it.

use std::collections::VecDeque;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attempt limit used by [`build_geometric_graph`].
pub const DEFAULT_GEOMETRIC_ATTEMPTS: usize = 1000;

/// Default disk radius for random geometric graphs on the unit square.
pub const DEFAULT_GEOMETRIC_RADIUS: f64 = 0.45;

/// Default mixing `(a, b)` for `W = a I + b W_m`.
pub const DEFAULT_SCALING: (f64, f64) = (1.1 / 2.0, 0.9 / 2.0);

const STOCHASTIC_TOL: f64 = 1e-12;
const SPECTRAL_GAP_TOL: f64 = 1e-10;

/// Undirected connected graph with implicit self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
    positions: Option<Vec<[f64; 2]>>,
    seed: Option<u64>,
    attempts: usize,
}

impl Graph {
    /// Build a graph from an edge list. Self-loops in the list are ignored,
    /// duplicates collapse. Fails if the graph is disconnected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let g = Self::from_edges_unchecked(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn from_edges_unchecked(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i != j {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph {
            neighbors,
            positions: None,
            seed: None,
            attempts: 1,
        })
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Neighbors of `i`, excluding `i` itself, in increasing order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `O_i`: neighbors of `i` plus `i`, in increasing order.
    pub fn neighborhood(&self, i: usize) -> Vec<usize> {
        let mut o = self.neighbors[i].clone();
        let at = o.partition_point(|&j| j < i);
        o.insert(at, i);
        o
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i == j || self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Non-self edges `(i, j)` with `i < j`, sorted.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// All edges including the self-loops `{i, i}`.
    pub fn edges_with_self_loops(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = (0..self.node_count()).map(|i| (i, i)).collect();
        out.extend(self.links());
        out.sort_unstable();
        out
    }

    pub fn link_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// Seed that produced this graph (geometric graphs only).
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of samples drawn before a connected geometric graph was found.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Breadth-first connectivity test.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Copy of the graph without the link `{i, j}` (connectivity not checked).
    pub fn without_link(&self, i: usize, j: usize) -> Graph {
        let mut g = self.clone();
        g.neighbors[i].retain(|&k| k != j);
        g.neighbors[j].retain(|&k| k != i);
        g
    }
}

/// Random geometric graph on the unit square, resampled with `seed + 1`,
/// `seed + 2`, ... until connected.
pub fn build_geometric_graph(n: usize, radius: f64, rng_seed: u64) -> Result<Graph> {
    build_geometric_graph_with_limit(n, radius, rng_seed, DEFAULT_GEOMETRIC_ATTEMPTS)
}

pub fn build_geometric_graph_with_limit(
    n: usize,
    radius: f64,
    rng_seed: u64,
    max_attempts: usize,
) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("geometric graph needs n >= 2, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    // Every pair in the unit square is closer than sqrt(2).
    let radius = radius.min(std::f64::consts::SQRT_2);
    for attempt in 0..max_attempts {
        let seed = rng_seed.wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let dx = positions[i][0] - positions[j][0];
                let dy = positions[i][1] - positions[j][1];
                if (dx * dx + dy * dy).sqrt() < radius {
                    edges.push((i, j));
                }
            }
        }
        let mut g = Graph::from_edges_unchecked(n, &edges)?;
        if g.is_connected() {
            g.positions = Some(positions);
            g.seed = Some(seed);
            g.attempts = attempt + 1;
            return Ok(g);
        }
    }
    Err(Error::InfeasibleRadius {
        radius,
        attempts: max_attempts,
    })
}

/// Path graph `0 - 1 - ... - (n-1)`.
pub fn build_chain_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chain graph needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &edges)
}

pub fn build_complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Symmetric stochastic weight matrix `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    w: DMatrix<f64>,
}

impl WeightMatrix {
    /// Wrap a matrix after checking symmetry, non-negativity and unit row sums.
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        let m = WeightMatrix { w };
        m.check_stochastic()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        WeightMatrix {
            w: DMatrix::identity(n, n),
        }
    }

    /// `J = (1/N) 1 1^T`.
    pub fn ideal_consensus(n: usize) -> Self {
        WeightMatrix {
            w: DMatrix::from_element(n, n, 1.0 / n as f64),
        }
    }

    pub fn size(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    fn check_stochastic(&self) -> Result<()> {
        let n = self.w.nrows();
        if n == 0 || self.w.ncols() != n {
            return Err(Error::InvalidWeights(format!(
                "expected a non-empty square matrix, got {}x{}",
                self.w.nrows(),
                self.w.ncols()
            )));
        }
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let v = self.w[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidWeights(format!("entry ({i}, {j}) = {v} is negative")));
                }
                if (v - self.w[(j, i)]).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidWeights(format!("not symmetric at ({i}, {j})")));
                }
                row += v;
            }
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidWeights(format!("row {i} sums to {row}")));
            }
        }
        Ok(())
    }

    /// Sorted eigenvalues of `W`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.w.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Stochastic, symmetric and positive definite.
    pub fn validate(&self) -> Result<()> {
        self.check_stochastic()?;
        let ev = self.eigenvalues();
        if ev[0] <= 0.0 {
            return Err(Error::InvalidWeights(format!(
                "not positive definite: smallest eigenvalue {:e}",
                ev[0]
            )));
        }
        Ok(())
    }

    /// Check that the off-diagonal support matches the graph's links.
    pub fn validate_support(&self, g: &Graph) -> Result<()> {
        let n = self.size();
        if g.node_count() != n {
            return Err(Error::DimensionMismatch {
                expected: g.node_count(),
                got: n,
            });
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && (self.w[(i, j)] > 0.0) != g.has_edge(i, j) {
                    return Err(Error::InvalidWeights(format!(
                        "support of W disagrees with the graph at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Metropolis rule: `W_ij = 1/(1 + max(deg_i, deg_j))` on links, diagonal fills the row.
pub fn metropolis_weights(g: &Graph) -> WeightMatrix {
    let n = g.node_count();
    let mut w = DMatrix::zeros(n, n);
    for (i, j) in g.links() {
        let v = 1.0 / (1.0 + g.degree(i).max(g.degree(j)) as f64);
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    for i in 0..n {
        let off: f64 = g.neighbors(i).iter().map(|&j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    WeightMatrix { w }
}

/// `a I + b W`, validated (stochastic and positive definite) before return.
pub fn scale_weights(w: &WeightMatrix, a: f64, b: f64) -> Result<WeightMatrix> {
    if (a + b - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidWeights(format!(
            "scaling a + b = {} breaks stochasticity",
            a + b
        )));
    }
    let n = w.size();
    let scaled = WeightMatrix {
        w: DMatrix::identity(n, n) * a + w.matrix() * b,
    };
    scaled.validate()?;
    Ok(scaled)
}

/// Eigen-structure of `𝓛 = I - W`.
#[derive(Clone, Debug)]
pub struct LaplacianSpectrum {
    laplacian: DMatrix<f64>,
    /// `λ_2 ≤ … ≤ λ_N`.
    eigvals_reduced: Vec<f64>,
    /// Columns `q_2 … q_N`, `N × (N-1)`.
    q: DMatrix<f64>,
}

impl LaplacianSpectrum {
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Spectral gap `λ_2(𝓛)`.
    pub fn lambda2(&self) -> f64 {
        self.eigvals_reduced.first().copied().unwrap_or(1.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals_reduced.last().copied().unwrap_or(0.0)
    }

    pub fn eigvals_reduced(&self) -> &[f64] {
        &self.eigvals_reduced
    }

    /// All eigenvalues of `𝓛` including the exact zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend_from_slice(&self.eigvals_reduced);
        v
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `Λ̂` as a dense diagonal matrix.
    pub fn lambda_hat(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigvals_reduced))
    }

    /// `(Λ̂^{-1/2} Qᵀ ⊗ I) v` for a stacked `v` with block size `d`.
    pub fn whitened_projection(&self, v: &[f64], d: usize) -> Vec<f64> {
        let n = self.laplacian.nrows();
        let m = self.eigvals_reduced.len();
        let mut out = vec![0.0; m * d];
        for c in 0..m {
            let scale = 1.0 / self.eigvals_reduced[c].sqrt();
            let block = &mut out[c * d..(c + 1) * d];
            for i in 0..n {
                let qic = self.q[(i, c)] * scale;
                for (o, x) in block.iter_mut().zip(&v[i * d..(i + 1) * d]) {
                    *o += qic * x;
                }
            }
        }
        out
    }
}

/// Full symmetric eigendecomposition of `I - W`. The zero eigenvalue is
/// dropped (it is exactly zero for a stochastic `W`); fails when `λ_2` is not
/// bounded away from zero.
pub fn spectrum(w: &WeightMatrix) -> Result<LaplacianSpectrum> {
    w.check_stochastic()?;
    let n = w.size();
    let laplacian = DMatrix::identity(n, n) - w.matrix();
    let eig = SymmetricEigen::new(laplacian.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigvals_reduced: Vec<f64> = order[1..].iter().map(|&k| eig.eigenvalues[k]).collect();
    let lambda2 = eigvals_reduced.first().copied().unwrap_or(1.0);
    if n > 1 && lambda2 <= SPECTRAL_GAP_TOL {
        return Err(Error::DegenerateSpectrum { lambda2 });
    }
    let mut q = DMatrix::zeros(n, n - 1);
    for (c, &k) in order[1..].iter().enumerate() {
        q.set_column(c, &eig.eigenvectors.column(k));
    }
    Ok(LaplacianSpectrum {
        laplacian,
        eigvals_reduced,
        q,
    })
}

/// Graph, weights and spectrum bundled together; immutable once built.
#[derive(Clone, Debug)]
pub struct NetworkModel {
    graph: Graph,
    weights: WeightMatrix,
    spectrum: LaplacianSpectrum,
    /// `O_i` with the matching weights, cached for the hot loops.
    mixing: Vec<Vec<(usize, f64)>>,
}

impl NetworkModel {
    pub fn new(graph: Graph, weights: WeightMatrix) -> Result<Self> {
        weights.validate()?;
        weights.validate_support(&graph)?;
        let spectrum = spectrum(&weights)?;
        let mixing = (0..graph.node_count())
            .map(|i| {
                graph
                    .neighborhood(i)
                    .into_iter()
                    .map(|j| (j, weights.get(i, j)))
                    .collect()
            })
            .collect();
        Ok(NetworkModel {
            graph,
            weights,
            spectrum,
            mixing,
        })
    }

    /// Metropolis weights scaled as `a I + b W_m`.
    pub fn with_scaled_metropolis(graph: Graph, a: f64, b: f64) -> Result<Self> {
        let w = scale_weights(&metropolis_weights(&graph), a, b)?;
        Self::new(graph, w)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn spectrum(&self) -> &LaplacianSpectrum {
        &self.spectrum
    }

    pub fn lambda2(&self) -> f64 {
        self.spectrum.lambda2()
    }

    /// `(j, W_ij)` for `j ∈ O_i`.
    pub fn mixing_row(&self, i: usize) -> &[(usize, f64)] {
        &self.mixing[i]
    }

    /// `x̄_i = Σ_{j∈O_i} W_ij x_j` written into `out`.
    pub fn weighted_average_into(&self, i: usize, x: &[f64], d: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(j, wij) in &self.mixing[i] {
            for (o, xj) in out.iter_mut().zip(&x[j * d..(j + 1) * d]) {
                *o += wij * xj;
            }
        }
    }

    /// Stacked neighbor averages `(W ⊗ I) x`.
    pub fn mix(&self, x: &[f64], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for i in 0..self.node_count() {
            self.weighted_average_into(i, x, d, &mut out[i * d..(i + 1) * d]);
        }
        out
    }

    /// `(𝓛 ⊗ I) x = x - (W ⊗ I) x`.
    pub fn laplacian_apply(&self, x: &[f64], d: usize) -> Vec<f64> {
        let mut out = self.mix(x, d);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi - *o;
        }
        out
    }

    pub fn to_file(&self) -> GraphFile {
        let n = self.node_count();
        GraphFile {
            node_count: n,
            seed: self.graph.seed,
            attempts: self.graph.attempts,
            positions: self.graph.positions.clone(),
            edges: self.graph.links().into_iter().map(|(i, j)| [i, j]).collect(),
            weights: (0..n).map(|i| (0..n).map(|j| self.weights.get(i, j)).collect()).collect(),
        }
    }
}

/// On-disk form of a network: node positions, link list (self-loops implicit) and `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub node_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub attempts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    pub edges: Vec<[usize; 2]>,
    pub weights: Vec<Vec<f64>>,
}

fn one() -> usize {
    1
}

impl GraphFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn into_model(self) -> Result<NetworkModel> {
        let n = self.node_count;
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = Graph::from_edges(n, &edges)?;
        if let Some(p) = &self.positions {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
        }
        graph.positions = self.positions;
        graph.seed = self.seed;
        graph.attempts = self.attempts;
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidWeights(format!("weights must be {n}x{n}")));
        }
        let w = DMatrix::from_fn(n, n, |i, j| self.weights[i][j]);
        NetworkModel::new(graph, WeightMatrix::new(w)?)
    }
}
