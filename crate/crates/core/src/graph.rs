//! Connected random regular graphs.
//!
//! Sampling uses the pairing (configuration) model: every vertex contributes
//! `k` stubs, the stubs are shuffled and paired, and any pairing containing a
//! self-loop or a repeated edge is rejected. Disconnected graphs are rejected
//! afterwards. For dense degrees (`k > (n - 1) / 2`) the complementary
//! `(n - 1 - k)`-regular graph is sampled instead; complementation is a
//! bijection between the two families, so the distribution is unchanged while
//! the rejection rate stays small.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};

/// Default number of pairing attempts before giving up.
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

/// A simple regular graph on vertices `0..n`.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    degree: usize,
    edges: Vec<(usize, usize)>,
}

/// Serialized form used in reproducibility logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Builds a graph from an explicit edge list.
    ///
    /// Rejects self-loops, repeated edges, out-of-range vertices and
    /// non-constant degree sequences. Connectivity is not required here; see
    /// [`is_connected`].
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_vertices == 0 {
            return Err(QrcError::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        let mut degrees = vec![0usize; n_vertices];
        for &(a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(QrcError::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n_vertices} vertices"
                )));
            }
            if a == b {
                return Err(QrcError::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(QrcError::InvalidGraph(format!("duplicate edge {e:?}")));
            }
            degrees[a] += 1;
            degrees[b] += 1;
        }
        let degree = degrees[0];
        if degrees.iter().any(|&d| d != degree) {
            return Err(QrcError::InvalidGraph("degree sequence is not constant".into()));
        }
        Ok(Self {
            n_vertices,
            degree,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Graph on the same vertices containing exactly the missing edges.
    pub fn complement(&self) -> Self {
        let n = self.n_vertices;
        let mut edges = Vec::with_capacity(n * (n - 1) / 2 - self.edges.len());
        for i in 0..n {
            for j in i + 1..n {
                if !self.has_edge(i, j) {
                    edges.push((i, j));
                }
            }
        }
        Self {
            n_vertices: n,
            degree: n - 1 - self.degree,
            edges,
        }
    }

    pub fn to_record(&self, seed: u64) -> GraphRecord {
        GraphRecord {
            n: self.n_vertices,
            k: self.degree,
            seed,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_record(record: &GraphRecord) -> Result<Self> {
        let edges: Vec<_> = record.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Self::from_edges(record.n, &edges)?;
        if g.degree != record.k {
            return Err(QrcError::InvalidGraph(format!(
                "record declares degree {} but edges give {}",
                record.k, g.degree
            )));
        }
        Ok(g)
    }
}

/// Samples a connected `k`-regular graph on `n` vertices.
pub fn sample_rrg<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Graph> {
    sample_rrg_with_bound(n, k, rng, DEFAULT_MAX_ATTEMPTS)
}

/// As [`sample_rrg`], with an explicit bound on rejected attempts.
pub fn sample_rrg_with_bound<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Graph> {
    if k == 0 || k >= n || (n * k) % 2 == 1 {
        return Err(QrcError::InfeasibleDegree { n, k });
    }
    let dense = 2 * k > n - 1;
    let sample_degree = if dense { n - 1 - k } else { k };
    for _ in 0..max_attempts {
        let Some(edges) = try_pairing(n, sample_degree, rng) else {
            continue;
        };
        let mut g = Graph {
            n_vertices: n,
            degree: sample_degree,
            edges,
        };
        if dense {
            g = g.complement();
        }
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(QrcError::RetryExhausted {
        attempts: max_attempts,
    })
}

/// One pass of the pairing model; `None` on a self-loop or repeated edge.
fn try_pairing<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    stubs.shuffle(rng);
    let mut set = BTreeSet::new();
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b || !set.insert((a.min(b), a.max(b))) {
            return None;
        }
    }
    Some(set.into_iter().collect())
}

/// Symmetric 0/1 adjacency matrix, row-major.
pub fn adjacency(g: &Graph) -> Vec<Vec<u8>> {
    let n = g.n_vertices;
    let mut a = vec![vec![0u8; n]; n];
    for &(i, j) in &g.edges {
        a[i][j] = 1;
        a[j][i] = 1;
    }
    a
}

/// Breadth-first search from vertex 0 reaches every vertex.
pub fn is_connected(g: &Graph) -> bool {
    let n = g.n_vertices;
    let mut neighbours = vec![Vec::new(); n];
    for &(i, j) in &g.edges {
        neighbours[i].push(j);
        neighbours[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &neighbours[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == n
}
