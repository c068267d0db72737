//! Communication graphs and gossip mixing.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Attempt cap used by [`erdos_renyi`].
pub const DEFAULT_MAX_ATTEMPTS: u32 = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("graph needs at least {min} nodes, got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("edge probability {0} outside (0, 1]")]
    BadProbability(f64),
    #[error("graph never connected after {0} attempts")]
    NeverConnected(u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("dimension mismatch: expected {expected} rows/columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric doubly stochastic: {0}")]
    NotDoublyStochastic(String),
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    // stored as (min, max)
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new() }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, NetworkError> {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    /// Path `0 - 1 - ... - n-1`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.edges.insert((i, j));
            }
        }
        g
    }

    /// Inserts `{i, j}`; re-inserting an existing edge is a no-op.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), NetworkError> {
        if i == j || i >= self.n || j >= self.n {
            return Err(NetworkError::InvalidEdge(i, j));
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// One `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_edge_list())
    }
}

/// Connected Erdős–Rényi graph `G(n, p)`, redrawn until connected.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, NetworkError> {
    erdos_renyi_with_attempts(n, p, seed, DEFAULT_MAX_ATTEMPTS).map(|(g, _)| g)
}

/// Like [`erdos_renyi`] but with an explicit attempt cap; also returns how
/// many draws were needed. Attempt `k` uses ChaCha stream `k` of `seed`.
pub fn erdos_renyi_with_attempts(
    n: usize,
    p: f64,
    seed: u64,
    max_attempts: u32,
) -> Result<(Graph, u32), NetworkError> {
    if n < 2 {
        return Err(NetworkError::TooFewNodes { n, min: 2 });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(NetworkError::BadProbability(p));
    }
    for attempt in 0..max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(attempt));
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    g.edges.insert((i, j));
                }
            }
        }
        if g.is_connected() {
            return Ok((g, attempt + 1));
        }
    }
    Err(NetworkError::NeverConnected(max_attempts))
}

/// Symmetric doubly stochastic weights with the cached `σ = ‖W − J‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    n: usize,
    // row-major n×n
    w: Vec<f64>,
    sigma: f64,
}

impl MixingMatrix {
    /// Metropolis–Hastings weights `1 / (1 + max(deg_i, deg_j))` on edges,
    /// remainder on the diagonal.
    pub fn metropolis(g: &Graph) -> Result<Self, NetworkError> {
        if !g.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        let n = g.n();
        let deg = g.degrees();
        let mut w = vec![0.0; n * n];
        for (i, j) in g.edges() {
            let wij = 1.0 / (1 + deg[i].max(deg[j])) as f64;
            w[i * n + j] = wij;
            w[j * n + i] = wij;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[i * n + j]).sum();
            w[i * n + i] = 1.0 - off;
        }
        Ok(Self::with_sigma(n, w))
    }

    /// Exact averaging `J = (1/n) 1 1ᵀ`.
    pub fn uniform(n: usize) -> Self {
        let v = 1.0 / n as f64;
        Self::with_sigma(n, vec![v; n * n])
    }

    /// `W = [1]` on a single agent, or `I` in general (no communication).
    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::with_sigma(n, w)
    }

    /// Wraps explicit weights after checking symmetry, nonnegativity and row sums.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NetworkError> {
        let n = rows.len();
        let mut w = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(NetworkError::DimensionMismatch { expected: n, got: row.len() });
            }
            w.extend_from_slice(row);
        }
        for i in 0..n {
            let sum: f64 = w[i * n..(i + 1) * n].iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(NetworkError::NotDoublyStochastic(format!("row {i} sums to {sum}")));
            }
            for j in 0..n {
                if w[i * n + j] < 0.0 {
                    return Err(NetworkError::NotDoublyStochastic(format!("negative entry ({i},{j})")));
                }
                if w[i * n + j] != w[j * n + i] {
                    return Err(NetworkError::NotDoublyStochastic(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self::with_sigma(n, w))
    }

    fn with_sigma(n: usize, w: Vec<f64>) -> Self {
        let mut m = Self { n, w, sigma: 0.0 };
        m.sigma = spectral_gap(&m);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    /// Cached `‖W − J‖₂`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Returns `W · rows` for an `n × d` matrix given as `n` rows.
    ///
    /// Evaluated as `x_i + Σ_{j≠i} w_ij (x_j − x_i)`, which equals `(W X)_i`
    /// because every row of `W` sums to one, and leaves consensus rows
    /// bit-for-bit unchanged.
    pub fn mix(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NetworkError> {
        if rows.len() != self.n {
            return Err(NetworkError::DimensionMismatch { expected: self.n, got: rows.len() });
        }
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(NetworkError::DimensionMismatch { expected: d, got: bad.len() });
        }
        let mut out = rows.to_vec();
        for (i, zi) in out.iter_mut().enumerate() {
            let xi = &rows[i];
            for (j, xj) in rows.iter().enumerate() {
                let wij = self.w[i * self.n + j];
                if j == i || wij == 0.0 {
                    continue;
                }
                for ((z, &a), &b) in zi.iter_mut().zip(xj).zip(xi) {
                    *z += wij * (a - b);
                }
            }
        }
        Ok(out)
    }

    /// Scalar version of [`MixingMatrix::mix`] (`d = 1`).
    pub fn mix_scalars(&self, values: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if values.len() != self.n {
            return Err(NetworkError::DimensionMismatch { expected: self.n, got: values.len() });
        }
        Ok((0..self.n)
            .map(|i| {
                let mut z = values[i];
                for (j, &vj) in values.iter().enumerate() {
                    let wij = self.w[i * self.n + j];
                    if j != i && wij != 0.0 {
                        z += wij * (vj - values[i]);
                    }
                }
                z
            })
            .collect())
    }
}

/// Largest absolute eigenvalue of `W − J`, via a dense symmetric eigendecomposition.
pub fn spectral_gap(w: &MixingMatrix) -> f64 {
    let n = w.n;
    if n <= 1 {
        return 0.0;
    }
    let inv_n = 1.0 / n as f64;
    let m = DMatrix::from_fn(n, n, |i, j| w.get(i, j) - inv_n);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0_f64, |acc, &l| acc.max(l.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Cyclic Jacobi eigenvalue iteration; independent of nalgebra.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _sweep in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    fn oracle_sigma(w: &MixingMatrix) -> f64 {
        let n = w.n();
        let a = (0..n).map(|i| (0..n).map(|j| w.get(i, j) - 1.0 / n as f64).collect()).collect();
        jacobi_eigenvalues(a).into_iter().fold(0.0, |m, l: f64| m.max(l.abs()))
    }

    #[test]
    fn er_with_p_one_is_complete() {
        let g = erdos_renyi(2, 1.0, 99).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = erdos_renyi(6, 1.0, 3).unwrap();
        assert_eq!(g, Graph::complete(6));
    }

    #[test]
    fn er_is_deterministic() {
        assert_eq!(erdos_renyi(5, 0.3, 7).unwrap(), erdos_renyi(5, 0.3, 7).unwrap());
    }

    #[test]
    fn er_rejects_bad_inputs() {
        assert_eq!(erdos_renyi(1, 0.5, 0), Err(NetworkError::TooFewNodes { n: 1, min: 2 }));
        assert_eq!(erdos_renyi(4, 0.0, 0), Err(NetworkError::BadProbability(0.0)));
        assert!(matches!(erdos_renyi(4, 1.5, 0), Err(NetworkError::BadProbability(_))));
        // a 30-node graph at p = 1e-4 essentially never connects
        assert_eq!(erdos_renyi_with_attempts(30, 1e-4, 0, 5), Err(NetworkError::NeverConnected(5)));
    }

    #[test]
    fn er_edge_count_matches_expectation() {
        // E[|E|] = p · C(20, 2) = 47.5; conditioning on connectivity pushes it up slightly
        let seeds = 400;
        let total: usize = (0..seeds).map(|s| erdos_renyi(20, 0.25, s).unwrap().edge_count()).sum();
        let mean = total as f64 / seeds as f64;
        assert!((mean - 47.5).abs() < 2.0, "mean edge count {mean}");
    }

    #[test]
    fn metropolis_two_nodes_is_averaging() {
        let w = MixingMatrix::metropolis(&Graph::path(2)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(w.get(i, j), 0.5);
            }
        }
        assert_abs_diff_eq!(w.sigma(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn metropolis_path_three() {
        let w = MixingMatrix::metropolis(&Graph::path(3)).unwrap();
        let expected = [[2.0 / 3.0, 1.0 / 3.0, 0.0], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [0.0, 1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(w.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(oracle_sigma(&w), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.sigma(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_has_zero_sigma() {
        assert_abs_diff_eq!(MixingMatrix::uniform(7).sigma(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(MixingMatrix::uniform(1).sigma(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sigma_matches_jacobi_oracle_on_random_graphs() {
        for seed in 0..20 {
            let g = erdos_renyi(12, 0.3, seed).unwrap();
            let w = MixingMatrix::metropolis(&g).unwrap();
            assert_abs_diff_eq!(w.sigma(), oracle_sigma(&w), epsilon = 1e-10);
        }
    }

    #[test]
    fn adding_an_edge_to_a_path_lowers_sigma() {
        let path = MixingMatrix::metropolis(&Graph::path(3)).unwrap();
        let tri = MixingMatrix::metropolis(&Graph::complete(3)).unwrap();
        assert!(tri.sigma() < path.sigma());
    }

    #[test]
    fn metropolis_rejects_disconnected() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(MixingMatrix::metropolis(&g), Err(NetworkError::Disconnected));
    }

    #[test]
    fn mix_examples() {
        let w = MixingMatrix::metropolis(&Graph::path(3)).unwrap();
        let same = vec![vec![0.3, -1.25]; 3];
        assert_eq!(w.mix(&same).unwrap(), same);

        let j = MixingMatrix::uniform(2);
        assert_eq!(j.mix(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap(), vec![vec![0.0, 0.0]; 2]);

        let out = w.mix_scalars(&[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(out[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mix_dimension_mismatch() {
        let w = MixingMatrix::uniform(3);
        assert!(matches!(w.mix(&[vec![1.0], vec![1.0]]), Err(NetworkError::DimensionMismatch { .. })));
        assert!(matches!(w.mix(&[vec![1.0], vec![1.0, 2.0], vec![0.0]]), Err(NetworkError::DimensionMismatch { .. })));
    }

    #[test]
    fn from_rows_validates() {
        assert!(MixingMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).is_ok());
        assert!(MixingMatrix::from_rows(&[vec![0.6, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MixingMatrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]).is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = Graph::path(3);
        assert_eq!(g.to_edge_list(), "0 1\n1 2\n");
    }
}
