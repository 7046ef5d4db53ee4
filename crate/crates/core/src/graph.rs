//! Undirected simple graphs on dense vertex ids `0..n`, with hop-distance
//! metrics and the structural queries (bridges, leaves, twin leaves) the
//! rest of the crate is built on.
//!
//! A [`Graph`] is immutable once built. Every transformation returns a new
//! graph, so the lazily computed [`DistanceMatrix`] can be shared freely
//! between worker threads.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::Vertex;

/// Errors raised while building or querying a graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge endpoint {vertex} out of range for a graph on {n} vertices")]
    OutOfRange { vertex: Vertex, n: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("{0}-{1} is not an edge of the graph")]
    NoSuchEdge(Vertex, Vertex),
    #[error("edge {0}-{1} is not a cut-edge")]
    NotCutEdge(Vertex, Vertex),
}

/// All-pairs hop distances.
///
/// Pairs in different components have no distance; [`DistanceMatrix::get`]
/// returns `None` for them instead of a numeric sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    cells: Vec<u32>,
}

const UNREACHABLE: u32 = u32::MAX;

impl DistanceMatrix {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Hop distance between `u` and `v`, or `None` if they are not connected.
    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> Option<u32> {
        match self.cells[u * self.n + v] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// `true` when `d(u, v) <= radius`. Unreachable pairs are never within range.
    #[inline]
    pub fn within(&self, u: Vertex, v: Vertex, radius: u32) -> bool {
        self.cells[u * self.n + v] <= radius
    }

    /// Row of `u`, with `None` for unreachable vertices.
    pub fn row(&self, u: Vertex) -> impl Iterator<Item = Option<u32>> + '_ {
        self.cells[u * self.n..(u + 1) * self.n]
            .iter()
            .map(|&d| (d != UNREACHABLE).then_some(d))
    }
}

/// Eccentricity-derived metrics of a connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    pub eccentricity: Vec<u32>,
    pub radius: u32,
    pub diameter: u32,
    /// Vertices of minimum eccentricity, ascending.
    pub centers: Vec<Vertex>,
    /// Lexicographically smallest pair `(u, v)`, `u <= v`, with `d(u, v)` equal to the diameter.
    pub antipodal: (Vertex, Vertex),
}

/// Structural summary of a connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    /// Bridges as `(u, v)` with `u < v`, sorted.
    pub cut_edges: Vec<(Vertex, Vertex)>,
    /// Degree-one vertices, ascending.
    pub leaves: Vec<Vertex>,
    /// Neighbours of leaves, ascending and deduplicated.
    pub support_vertices: Vec<Vertex>,
    /// Leaves grouped by their support vertex; each class ascending, classes
    /// ordered by their smallest member.
    pub twin_classes: Vec<Vec<Vertex>>,
    pub is_tree: bool,
}

/// One side of a graph split along a cut-edge.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: Graph,
    /// `to_original[new] = old`.
    pub to_original: Vec<Vertex>,
    /// `from_original[old] = Some(new)` for vertices in this component.
    pub from_original: Vec<Option<Vertex>>,
}

/// An undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
    labels: Option<Vec<String>>,
    distances: OnceLock<Arc<DistanceMatrix>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated edges and out-of-range endpoints.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (u, v) in edges {
            Self::check_edge(n, u, v)?;
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            list.push((a, b));
            adj[a].push(b);
            adj[b].push(a);
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(Self {
            n,
            adj,
            edges: list,
            labels: None,
            distances: OnceLock::new(),
        })
    }

    fn check_edge(n: usize, u: Vertex, v: Vertex) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::OutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("complete graph edges are valid")
    }

    /// Star with centre 0 and `leaves` pendant vertices.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are valid")
    }

    /// Parses the text graph format: a header `n m`, then `m` lines `u v`.
    /// Lines starting with `#` and blank lines are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing `n m` header".into(),
        })?;
        let [n, m] = parse_pair(hline, header)?;

        let mut edges = Vec::with_capacity(m);
        for (line, content) in lines {
            if edges.len() == m {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("more than the {m} edges announced in the header"),
                });
            }
            let [u, v] = parse_pair(line, content)?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: text.lines().count().max(1),
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, edges)
    }

    /// Serializes in the format read by [`Graph::from_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n, "one label per vertex");
        self.labels = Some(labels);
        self
    }

    pub fn label(&self, v: Vertex) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Neighbours of `v`, ascending.
    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// BFS distances from `source`; `None` marks unreachable vertices.
    pub fn bfs(&self, source: Vertex) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs distances, computed once per graph by repeated BFS.
    pub fn distances(&self) -> &DistanceMatrix {
        self.distances.get_or_init(|| {
            let n = self.n;
            let mut cells = vec![UNREACHABLE; n * n];
            for s in 0..n {
                for (t, d) in self.bfs(s).into_iter().enumerate() {
                    if let Some(d) = d {
                        cells[s * n + t] = d;
                    }
                }
            }
            Arc::new(DistanceMatrix { n, cells })
        })
    }

    /// Vertex sets of the connected components, each ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    pub fn is_tree(&self) -> bool {
        self.n > 0 && self.edges.len() + 1 == self.n && self.is_connected()
    }

    pub(crate) fn require_connected(&self) -> Result<(), GraphError> {
        if self.n == 0 {
            Err(GraphError::Empty)
        } else if !self.is_connected() {
            Err(GraphError::Disconnected)
        } else {
            Ok(())
        }
    }

    /// Subgraph induced by `vertices`, relabelled in the given order.
    /// Returns the new graph and the `new -> old` map.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut index = vec![None; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = Some(i);
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| Some((index[u]?, index[v]?)));
        let sub = Graph::new(vertices.len(), edges).expect("induced subgraph of a simple graph");
        (sub, vertices.to_vec())
    }

    pub fn metrics(&self) -> Result<Metrics, GraphError> {
        self.require_connected()?;
        let dist = self.distances();
        let eccentricity: Vec<u32> = (0..self.n)
            .map(|u| dist.row(u).map(|d| d.unwrap()).max().unwrap_or(0))
            .collect();
        let radius = *eccentricity.iter().min().unwrap();
        let diameter = *eccentricity.iter().max().unwrap();
        let centers = (0..self.n).filter(|&v| eccentricity[v] == radius).collect();
        let antipodal = (0..self.n)
            .flat_map(|u| (u..self.n).map(move |v| (u, v)))
            .find(|&(u, v)| dist.get(u, v) == Some(diameter))
            .unwrap();
        Ok(Metrics {
            eccentricity,
            radius,
            diameter,
            centers,
            antipodal,
        })
    }

    /// Convenience for `metrics()?.radius`.
    pub fn radius(&self) -> Result<u32, GraphError> {
        Ok(self.metrics()?.radius)
    }

    pub fn structure(&self) -> Result<Structure, GraphError> {
        self.require_connected()?;
        let leaves: Vec<Vertex> = (0..self.n).filter(|&v| self.degree(v) == 1).collect();
        let mut by_support: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for &l in &leaves {
            by_support.entry(self.adj[l][0]).or_default().push(l);
        }
        let support_vertices = by_support.keys().copied().collect();
        let mut twin_classes: Vec<Vec<Vertex>> = by_support.into_values().collect();
        twin_classes.sort_unstable_by_key(|c| c[0]);
        Ok(Structure {
            cut_edges: self.bridges(),
            leaves,
            support_vertices,
            twin_classes,
            is_tree: self.edges.len() + 1 == self.n,
        })
    }

    /// Bridges via an iterative low-link DFS.
    fn bridges(&self) -> Vec<(Vertex, Vertex)> {
        let n = self.n;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut out = Vec::new();
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // (vertex, parent, next neighbour index)
            let mut stack = vec![(root, usize::MAX, 0usize)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.last_mut() {
                let (u, parent, next) = *top;
                if let Some(&w) = self.adj[u].get(next) {
                    top.2 += 1;
                    if w == parent {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, u, 0));
                    } else {
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[u]);
                        if low[u] > disc[parent] {
                            out.push((parent.min(u), parent.max(u)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Splits the graph along the cut-edge `u v`. The first component holds `u`.
    pub fn remove_edge_components(
        &self,
        u: Vertex,
        v: Vertex,
    ) -> Result<(Component, Component), GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::NoSuchEdge(u, v));
        }
        let key = (u.min(v), u.max(v));
        let rest = Graph::new(self.n, self.edges.iter().copied().filter(|&e| e != key))
            .expect("edge subset of a simple graph");
        let reach = rest.bfs(u);
        if reach[v].is_some() {
            return Err(GraphError::NotCutEdge(u, v));
        }
        let (side_u, side_v): (Vec<Vertex>, Vec<Vertex>) =
            (0..self.n).partition(|&w| reach[w].is_some());
        let split = |vertices: Vec<Vertex>| {
            let (graph, to_original) = self.induced_subgraph(&vertices);
            let mut from_original = vec![None; self.n];
            for (new, &old) in to_original.iter().enumerate() {
                from_original[old] = Some(new);
            }
            Component {
                graph,
                to_original,
                from_original,
            }
        };
        Ok((split(side_u), split(side_v)))
    }
}

fn parse_pair(line: usize, content: &str) -> Result<[usize; 2], GraphError> {
    let mut it = content.split_whitespace();
    let mut next = |what: &str| -> Result<usize, GraphError> {
        let tok = it.next().ok_or_else(|| GraphError::Parse {
            line,
            msg: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| GraphError::Parse {
            line,
            msg: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let pair = [next("first value")?, next("second value")?];
    if let Some(extra) = it.next() {
        return Err(GraphError::Parse {
            line,
            msg: format!("unexpected token `{extra}`"),
        });
    }
    Ok(pair)
}
