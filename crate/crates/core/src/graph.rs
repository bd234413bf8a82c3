//! Node-identity-aware graphs over a fixed vertex universe.
//!
//! Every graph in a dataset shares one [`VertexUniverse`]; a graph is nothing
//! more than its edge set. Edges are stored as a bitset over the
//! `n(n-1)/2` upper-triangle pair slots so that symmetric difference and edit
//! distance reduce to word-wise XOR and popcount.
//!
//! The linear slot of the pair `(u, v)` with `u < v` is
//! `u*n - u*(u+1)/2 + (v - u - 1)`. The dataset format and the oracle wire
//! protocol both carry explicit `[u, v]` pairs, but anything that exports a
//! flat per-pair table (the explanation CSVs, for instance) orders rows by
//! this index.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graphs belong to different vertex universes")]
    UniverseMismatch,
    #[error("vertex {vertex} out of range for a universe of {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("a vertex universe needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("a vertex universe holds at most {MAX_VERTICES} vertices, got {0}")]
    TooManyVertices(usize),
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("expected {expected} vertex labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("invalid vertex set {input:?}: {reason}")]
    InvalidVertexSet { input: String, reason: String },
}

/// Bounds the pair table (`n(n−1)/2` entries of 8 bytes).
pub const MAX_VERTICES: usize = 8192;

/// The shared vertex set `V` (the ROIs of an atlas).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexUniverse {
    labels: Vec<String>,
    region_of: BTreeMap<usize, String>,
    pairs: Vec<(u32, u32)>,
}

impl VertexUniverse {
    pub fn new(
        labels: Vec<String>,
        region_of: BTreeMap<usize, String>,
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(n));
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        if let Some((&vertex, _)) = region_of.iter().find(|(&v, _)| v >= n) {
            return Err(GraphError::VertexOutOfRange { vertex, n });
        }
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u as u32, v as u32));
            }
        }
        Ok(Self {
            labels,
            region_of,
            pairs,
        })
    }

    /// A universe with labels `v0 .. v{n-1}` and no region metadata.
    pub fn anonymous(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(n));
        }
        Self::new((0..n).map(|i| format!("v{i}")).collect(), BTreeMap::new())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// `|V²|`, the number of unordered vertex pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn region_of(&self) -> &BTreeMap<usize, String> {
        &self.region_of
    }

    pub fn region(&self, v: usize) -> Option<&str> {
        self.region_of.get(&v).map(String::as_str)
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    /// Linear slot of the unordered pair `{a, b}`.
    pub fn pair_index(&self, a: usize, b: usize) -> Result<usize, GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(GraphError::SelfLoop { vertex: a });
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        let n = self.n();
        Ok(u * n - u * (u + 1) / 2 + (v - u - 1))
    }

    /// Inverse of [`pair_index`](Self::pair_index).
    pub fn pair_at(&self, index: usize) -> Edge {
        let (u, v) = self.pairs[index];
        Edge {
            u: u as usize,
            v: v as usize,
        }
    }
}

/// An unordered vertex pair, always stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", try_from = "[usize; 2]")]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Self { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop { vertex: a }),
        }
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

impl TryFrom<[usize; 2]> for Edge {
    type Error = GraphError;

    fn try_from([a, b]: [usize; 2]) -> Result<Self, Self::Error> {
        Edge::new(a, b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

/// A graph `E ⊆ V²`, identified with its edge set.
#[derive(Clone)]
pub struct Graph {
    universe: Arc<VertexUniverse>,
    bits: Vec<u64>,
}

/// Candidate pools, symmetric differences and visited lists share the graph
/// representation.
pub type EdgeSet = Graph;

impl Graph {
    pub fn empty(universe: Arc<VertexUniverse>) -> Self {
        let words = universe.pair_count().div_ceil(64);
        Self {
            universe,
            bits: vec![0; words],
        }
    }

    pub fn from_edges<I>(universe: Arc<VertexUniverse>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(universe);
        for (a, b) in edges {
            let idx = g.universe.pair_index(a, b)?;
            g.insert_index(idx);
        }
        Ok(g)
    }

    pub fn from_indices<I>(universe: Arc<VertexUniverse>, indices: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut g = Self::empty(universe);
        for idx in indices {
            g.insert_index(idx);
        }
        g
    }

    pub fn universe(&self) -> &Arc<VertexUniverse> {
        &self.universe
    }

    /// Raw membership words; used as a canonical hash key.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.universe
            .pair_index(a, b)
            .is_ok_and(|idx| self.contains_index(idx))
    }

    pub fn insert_index(&mut self, idx: usize) -> bool {
        let was = self.contains_index(idx);
        self.bits[idx / 64] |= 1 << (idx % 64);
        !was
    }

    pub fn remove_index(&mut self, idx: usize) -> bool {
        let was = self.contains_index(idx);
        self.bits[idx / 64] &= !(1 << (idx % 64));
        was
    }

    pub fn toggle_index(&mut self, idx: usize) {
        self.bits[idx / 64] ^= 1 << (idx % 64);
    }

    pub fn insert(&mut self, a: usize, b: usize) -> Result<bool, GraphError> {
        let idx = self.universe.pair_index(a, b)?;
        Ok(self.insert_index(idx))
    }

    pub fn remove(&mut self, a: usize, b: usize) -> Result<bool, GraphError> {
        let idx = self.universe.pair_index(a, b)?;
        Ok(self.remove_index(idx))
    }

    /// Pair indices of present edges, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Edges in canonical order (ascending pair index, i.e. lexicographic).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.indices().map(|i| self.universe.pair_at(i))
    }

    fn check_same_universe(&self, other: &Graph) -> Result<(), GraphError> {
        if Arc::ptr_eq(&self.universe, &other.universe) || *self.universe == *other.universe {
            Ok(())
        } else {
            Err(GraphError::UniverseMismatch)
        }
    }

    fn zip_with(&self, other: &Graph, op: impl Fn(u64, u64) -> u64) -> Result<Graph, GraphError> {
        self.check_same_universe(other)?;
        Ok(Graph {
            universe: Arc::clone(&self.universe),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// `(self \ other) ∪ (other \ self)`.
    pub fn symmetric_difference(&self, other: &Graph) -> Result<EdgeSet, GraphError> {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// `|self Δ other|`.
    pub fn edit_distance(&self, other: &Graph) -> Result<usize, GraphError> {
        self.check_same_universe(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Flips the membership of every edge in `s`.
    pub fn toggle_edges(&self, s: &EdgeSet) -> Result<Graph, GraphError> {
        self.symmetric_difference(s)
    }

    pub fn difference(&self, other: &Graph) -> Result<EdgeSet, GraphError> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersection(&self, other: &Graph) -> Result<EdgeSet, GraphError> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Graph) -> Result<EdgeSet, GraphError> {
        self.zip_with(other, |a, b| a | b)
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.check_same_universe(other).is_ok() && self.bits == other.bits
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.universe.n())
            .field("edges", &self.edges().map(|e| (e.u, e.v)).collect::<Vec<_>>())
            .finish()
    }
}

/// A sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self(vertices)
    }

    /// Parses lists such as `0-4,7,9-10` (inclusive ranges).
    pub fn parse(input: &str) -> Result<Self, GraphError> {
        let bad = |reason: &str| GraphError::InvalidVertexSet {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let mut out = Vec::new();
        for part in input.split(',').map(str::trim) {
            if part.is_empty() {
                return Err(bad("empty element"));
            }
            match part.split_once('-') {
                Some((lo, hi)) => {
                    let lo: usize = lo.trim().parse().map_err(|_| bad("bad range start"))?;
                    let hi: usize = hi.trim().parse().map_err(|_| bad("bad range end"))?;
                    if lo > hi {
                        return Err(bad("descending range"));
                    }
                    if hi - lo > 1 << 20 {
                        return Err(bad("range too large"));
                    }
                    out.extend(lo..=hi);
                }
                None => out.push(part.parse().map_err(|_| bad("bad vertex index"))?),
            }
        }
        Ok(Self::new(out))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| !other.contains(v))
    }

    pub fn check_within(&self, universe: &VertexUniverse) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&v) => universe.check_vertex(v),
            None => Ok(()),
        }
    }

    /// Number of vertex pairs inside the set, `|S|(|S|-1)/2`.
    pub fn pair_capacity(&self) -> usize {
        self.0.len() * self.0.len().saturating_sub(1) / 2
    }

    /// Pair indices of all pairs with both endpoints in the set, ascending.
    pub fn induced_pairs(&self, universe: &VertexUniverse) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.pair_capacity());
        for (i, &u) in self.0.iter().enumerate() {
            for &v in &self.0[i + 1..] {
                out.push(universe.pair_index(u, v).expect("vertex set checked against universe"));
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of edges of `g` induced by the set.
    pub fn induced_edge_count(&self, g: &Graph) -> usize {
        let universe = g.universe();
        let mut count = 0;
        for (i, &u) in self.0.iter().enumerate() {
            for &v in &self.0[i + 1..] {
                if let Ok(idx) = universe.pair_index(u, v) {
                    count += g.contains_index(idx) as usize;
                }
            }
        }
        count
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
