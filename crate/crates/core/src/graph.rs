//! Undirected simple graphs stored as dense, bit-packed adjacency rows.
//!
//! Also hosts vertex orders (permutations), degree profiles and the plain-text
//! edge-list format used by every file-facing tool in this crate:
//!
//! ```text
//! # comment
//! n 3
//! 0 1
//! 1 2
//! ```

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex order has length {got}, graph has {expected} vertices")]
    OrderLength { expected: usize, got: usize },
    #[error("vertex order is not a permutation: {0}")]
    NotAPermutation(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Undirected simple graph on vertices `0..n`.
///
/// Rows are packed 64 vertices per word. The matrix is kept symmetric with a
/// zero diagonal by every constructor.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    /// Builds a graph from an edge iterator. Duplicate edges collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set(u, v, true);
            }
        }
        g
    }

    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.set(u, v, true);
        Ok(())
    }

    pub(crate) fn remove_edge(&mut self, u: usize, v: usize) {
        self.set(u, v, false);
    }

    fn set(&mut self, u: usize, v: usize, on: bool) {
        debug_assert!(u != v && u < self.n && v < self.n);
        for (a, b) in [(u, v), (v, u)] {
            let w = &mut self.bits[a * self.words + b / 64];
            if on {
                *w |= 1 << (b % 64);
            } else {
                *w &= !(1 << (b % 64));
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Neighbors of `u` in increasing index order.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    /// Induced subgraph on `vertices`, relabeled `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set(i, j, true);
                }
            }
        }
        g
    }
}

/// A permutation of `0..n`. Position `i` of a reordered graph holds the
/// original vertex `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexOrder(Vec<usize>);

impl VertexOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self, GraphError> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() {
                return Err(GraphError::NotAPermutation(format!(
                    "index {p} out of range 0..{}",
                    perm.len()
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(GraphError::NotAPermutation(format!("index {p} repeated")));
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Uniformly random permutation of `0..n`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut crate::rng::rng_from_seed(seed));
        Self(perm)
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

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Self(inv)
    }
}

impl TryFrom<Vec<usize>> for VertexOrder {
    type Error = GraphError;

    fn try_from(perm: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(perm)
    }
}

impl From<VertexOrder> for Vec<usize> {
    fn from(order: VertexOrder) -> Self {
        order.0
    }
}

/// Per-vertex degrees plus the distinct degree values in descending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub degrees: Vec<usize>,
    pub classes: Vec<usize>,
}

pub fn degrees(g: &Graph) -> DegreeProfile {
    let degrees: Vec<usize> = (0..g.n()).map(|u| g.degree(u)).collect();
    let mut classes = degrees.clone();
    classes.sort_unstable_by(|a, b| b.cmp(a));
    classes.dedup();
    DegreeProfile { degrees, classes }
}

/// Relabels `g` so that `result[i][j] == g[perm[i]][perm[j]]`.
pub fn apply_order(g: &Graph, order: &VertexOrder) -> Result<Graph, GraphError> {
    if order.len() != g.n() {
        return Err(GraphError::OrderLength {
            expected: g.n(),
            got: order.len(),
        });
    }
    Ok(g.induced(order.as_slice()))
}

pub fn read_edge_list(text: &str) -> Result<Graph, ParseError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ParseError { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match (&mut graph, fields.as_slice()) {
            (None, ["n", count]) => {
                let n = count
                    .parse::<usize>()
                    .map_err(|_| err(format!("invalid vertex count {count:?}")))?;
                graph = Some(Graph::empty(n));
            }
            (None, _) => return Err(err("expected header \"n <count>\"".into())),
            (Some(_), ["n", _]) => return Err(err("duplicate header".into())),
            (Some(g), [a, b]) => {
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(format!("invalid vertex index {s:?}")))
                };
                let (u, v) = (parse(a)?, parse(b)?);
                g.insert_edge(u, v).map_err(|e| err(e.to_string()))?;
            }
            (Some(_), _) => {
                return Err(err(format!("expected two vertex indices, got {content:?}")))
            }
        }
    }
    graph.ok_or(ParseError {
        line: text.lines().count().max(1),
        message: "missing header \"n <count>\"".into(),
    })
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
