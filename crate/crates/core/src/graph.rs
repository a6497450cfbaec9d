//! Relational datasets: nodes with feature vectors and directed labeled edges.
//!
//! Node indices are 0-based. The label matrix keeps the label of edge
//! `start -> end` at `Y[(end, start)]`, so `vec(Y)` follows the global edge
//! index `start * p + end`.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub start: usize,
    pub end: usize,
    pub label: f64,
}

impl Edge {
    pub fn new(start: usize, end: usize, label: f64) -> Self {
        Edge { start, end, label }
    }
}

/// Which endpoint an edge is conditioned on when grouping for ranking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Direction {
    /// Group edges by their start node.
    #[default]
    Outgoing,
    /// Group edges by their end node.
    Incoming,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Outgoing => "outgoing",
            Direction::Incoming => "incoming",
        }
    }

    /// The node an edge is conditioned on.
    pub fn key(&self, e: &Edge) -> usize {
        match self {
            Direction::Outgoing => e.start,
            Direction::Incoming => e.end,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outgoing" => Ok(Direction::Outgoing),
            "incoming" => Ok(Direction::Incoming),
            other => Err(invalid(format!("unknown direction '{other}'"))),
        }
    }
}

/// Nodes (ids and a `p x d` feature matrix) plus a multiset of directed edges.
#[derive(Clone, Debug)]
pub struct GraphDataset {
    node_ids: Vec<String>,
    features: Matrix,
    edges: Vec<Edge>,
}

impl GraphDataset {
    pub fn new(node_ids: Vec<String>, features: Matrix, edges: Vec<Edge>) -> Result<Self> {
        if node_ids.len() != features.rows() {
            return Err(invalid(format!(
                "{} node ids but {} feature rows",
                node_ids.len(),
                features.rows()
            )));
        }
        if node_ids.is_empty() {
            return Err(invalid("dataset has no nodes"));
        }
        if !features.all_finite() {
            return Err(invalid("node features must be finite"));
        }
        let p = node_ids.len();
        for (k, e) in edges.iter().enumerate() {
            if e.start >= p || e.end >= p {
                return Err(invalid(format!(
                    "edge {k} ({} -> {}) references a node outside 0..{p}",
                    e.start, e.end
                )));
            }
            if !e.label.is_finite() {
                return Err(invalid(format!("edge {k} has a non-finite label")));
            }
        }
        Ok(GraphDataset {
            node_ids,
            features,
            edges,
        })
    }

    /// Dataset with generated ids `"0"`, `"1"`, ... .
    pub fn with_numbered_nodes(features: Matrix, edges: Vec<Edge>) -> Result<Self> {
        let ids = (0..features.rows()).map(|i| i.to_string()).collect();
        GraphDataset::new(ids, features, edges)
    }

    /// Complete graph (loops included) whose edge `h -> i` carries `Y[(i, h)]`.
    pub fn complete_from_labels(features: Matrix, labels: &Matrix) -> Result<Self> {
        let p = features.rows();
        if labels.shape() != (p, p) {
            return Err(invalid(format!(
                "label matrix is {:?}, expected {p}x{p}",
                labels.shape()
            )));
        }
        let edges = (0..p)
            .flat_map(|h| (0..p).map(move |i| (h, i)))
            .map(|(h, i)| Edge::new(h, i, labels[(i, h)]))
            .collect();
        GraphDataset::with_numbered_nodes(features, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.label).collect()
    }

    /// True when every ordered pair (loops included) appears exactly once.
    pub fn is_complete(&self) -> bool {
        build_label_matrix(self).is_ok()
    }
}

/// `p x p` label matrix with `Y[(end, start)]` = label of `start -> end`.
/// Requires exactly one edge per ordered pair.
pub fn build_label_matrix(ds: &GraphDataset) -> Result<Matrix> {
    let p = ds.node_count();
    let mut y = Matrix::zeros(p, p);
    let mut seen = vec![false; p * p];
    for e in ds.edges() {
        let idx = e.start * p + e.end;
        if seen[idx] {
            return Err(Error::IncompleteGraph(format!(
                "duplicate edge {} -> {}",
                ds.node_ids[e.start], ds.node_ids[e.end]
            )));
        }
        seen[idx] = true;
        y[(e.end, e.start)] = e.label;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        let (h, i) = (missing / p, missing % p);
        return Err(Error::IncompleteGraph(format!(
            "missing edge {} -> {}",
            ds.node_ids[h], ds.node_ids[i]
        )));
    }
    Ok(y)
}

/// Maps each training edge to its pair index `start * p + end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bookkeeping {
    pair_count: usize,
    pair_index: Vec<usize>,
}

impl Bookkeeping {
    pub fn new(pair_count: usize, pair_index: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = pair_index.iter().find(|&&k| k >= pair_count) {
            return Err(invalid(format!(
                "pair index {bad} out of range for {pair_count} pairs"
            )));
        }
        Ok(Bookkeeping {
            pair_count,
            pair_index,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.pair_index.len()
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn pair_indices(&self) -> &[usize] {
        &self.pair_index
    }

    /// `B u`: picks the pair entries of the training edges.
    pub fn gather(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.pair_count {
            return Err(invalid(format!(
                "gather expects length {}, got {}",
                self.pair_count,
                u.len()
            )));
        }
        Ok(self.pair_index.iter().map(|&k| u[k]).collect())
    }

    /// `B^T w`: sums edge entries into their pairs.
    pub fn scatter_add(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.pair_index.len() {
            return Err(invalid(format!(
                "scatter expects length {}, got {}",
                self.pair_index.len(),
                w.len()
            )));
        }
        let mut out = vec![0.0; self.pair_count];
        for (&k, &x) in self.pair_index.iter().zip(w) {
            out[k] += x;
        }
        Ok(out)
    }

    /// Explicit `q x p²` 0/1 matrix.
    pub fn to_matrix(&self) -> Matrix {
        let mut b = Matrix::zeros(self.pair_index.len(), self.pair_count);
        for (row, &k) in self.pair_index.iter().enumerate() {
            b[(row, k)] = 1.0;
        }
        b
    }
}

pub fn build_bookkeeping(ds: &GraphDataset) -> Result<Bookkeeping> {
    let p = ds.node_count();
    let idx = ds.edges().iter().map(|e| e.start * p + e.end).collect();
    Bookkeeping::new(p * p, idx)
}

/// Grouping of edges by conditioning node; the operator `L = I - Q Q^T`.
#[derive(Clone, Debug)]
pub struct BlockStructure {
    group_of_edge: Vec<usize>,
    sizes: Vec<usize>,
    keys: Vec<usize>,
}

impl BlockStructure {
    /// Groups `edges` by `direction`. Groups appear in order of first key
    /// occurrence in ascending node order; only non-empty groups are kept.
    pub fn from_edges(edges: &[Edge], direction: Direction) -> Self {
        let mut keys: Vec<usize> = edges.iter().map(|e| direction.key(e)).collect();
        keys.sort_unstable();
        keys.dedup();
        let slot: HashMap<usize, usize> = keys.iter().enumerate().map(|(g, &k)| (k, g)).collect();
        let mut sizes = vec![0; keys.len()];
        let group_of_edge = edges
            .iter()
            .map(|e| {
                let g = slot[&direction.key(e)];
                sizes[g] += 1;
                g
            })
            .collect();
        BlockStructure {
            group_of_edge,
            sizes,
            keys,
        }
    }

    pub fn from_dataset(ds: &GraphDataset, direction: Direction) -> Self {
        BlockStructure::from_edges(ds.edges(), direction)
    }

    /// Builds groups from explicit group ids (one per entry).
    pub fn from_group_ids(ids: &[usize]) -> Self {
        let edges: Vec<Edge> = ids.iter().map(|&g| Edge::new(g, 0, 0.0)).collect();
        BlockStructure::from_edges(&edges, Direction::Outgoing)
    }

    pub fn len(&self) -> usize {
        self.group_of_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of_edge.is_empty()
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Conditioning node of each group.
    pub fn group_keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn group_of(&self, edge: usize) -> usize {
        self.group_of_edge[edge]
    }

    /// Subtracts each group's mean: `v - Q (Q^T v)`, in O(q).
    pub fn apply_centering(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.group_of_edge.len() {
            return Err(invalid(format!(
                "block centering expects length {}, got {}",
                self.group_of_edge.len(),
                v.len()
            )));
        }
        let mut sums = vec![0.0; self.sizes.len()];
        for (&g, &x) in self.group_of_edge.iter().zip(v) {
            sums[g] += x;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&self.sizes)
            .map(|(s, &n)| s / n as f64)
            .collect();
        Ok(v
            .iter()
            .zip(&self.group_of_edge)
            .map(|(x, &g)| x - means[g])
            .collect())
    }

    /// Explicit `q x q` matrix `L`.
    pub fn to_matrix(&self) -> Matrix {
        let q = self.len();
        Matrix::from_fn(q, q, |a, b| {
            let (ga, gb) = (self.group_of_edge[a], self.group_of_edge[b]);
            let same = if ga == gb { 1.0 / self.sizes[ga] as f64 } else { 0.0 };
            if a == b {
                1.0 - same
            } else {
                -same
            }
        })
    }
}

pub fn apply_block_centering(bs: &BlockStructure, v: &[f64]) -> Result<Vec<f64>> {
    bs.apply_centering(v)
}
