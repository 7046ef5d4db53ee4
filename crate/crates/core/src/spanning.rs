//! Spanning trees: counting, enumeration, the minimum of γ_Bk over them, and
//! the construction of a spanning tree on which a given optimal broadcast
//! still dominates.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::solver::{
    first_undominated, gamma_bk_below, gamma_bk_with, BroadcastFunction, SolveError, SolverConfig,
};
use crate::{Cost, Power, Vertex};

/// Default cap on the number of spanning trees a caller may enumerate.
pub const DEFAULT_TREE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanningError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("graph has {} spanning trees, above the limit {limit}", count.map_or("too many to count".to_string(), |c| c.to_string()))]
    TooManyTrees { count: Option<u128>, limit: u128 },
    #[error("extraction needs k >= 3 (got {0})")]
    InvalidK(Power),
    #[error("broadcast is defined for k = {found}, expected {expected}")]
    CapMismatch { expected: Power, found: Power },
    #[error("broadcaster {dropped} is redundant: its ball lies inside the ball of {kept}, so the broadcast is not optimal")]
    Redundant { dropped: Vertex, kept: Vertex },
    #[error("pruned ball trees violate {0}")]
    Invariant(&'static str),
}

/// Number of spanning trees by the matrix-tree theorem (fraction-free
/// Bareiss elimination on a Laplacian minor). `None` on `i128` overflow.
pub fn spanning_tree_count(g: &Graph) -> Option<u128> {
    let n = g.order();
    if n == 0 {
        return Some(0);
    }
    let m = n - 1;
    let mut a = vec![vec![0i128; m]; m];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = g.degree(i + 1) as i128;
        for &w in g.neighbors(i + 1) {
            if w > 0 {
                row[w - 1] = -1;
            }
        }
    }
    let mut prev = 1i128;
    let mut sign = 1i128;
    for p in 0..m {
        if a[p][p] == 0 {
            let Some(swap) = (p + 1..m).find(|&r| a[r][p] != 0) else {
                return Some(0);
            };
            a.swap(p, swap);
            sign = -sign;
        }
        for i in p + 1..m {
            for j in p + 1..m {
                let t = a[i][j]
                    .checked_mul(a[p][p])?
                    .checked_sub(a[i][p].checked_mul(a[p][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[p][p];
    }
    let det = if m == 0 { 1 } else { sign * a[m - 1][m - 1] };
    u128::try_from(det).ok()
}

/// Lazily enumerates the spanning trees of `g`, each exactly once.
///
/// Edges are taken in sorted order and each is either included (when it
/// closes no cycle) or excluded (when the remaining edges can still span);
/// inclusion is tried first, so trees appear in lexicographic order of
/// their edge lists.
pub fn enumerate_spanning_trees(g: &Graph) -> Result<SpanningTrees<'_>, SpanningError> {
    enumerate_spanning_trees_limited(g, DEFAULT_TREE_LIMIT)
}

pub fn enumerate_spanning_trees_limited(
    g: &Graph,
    limit: u128,
) -> Result<SpanningTrees<'_>, SpanningError> {
    g.require_connected()?;
    match spanning_tree_count(g) {
        Some(c) if c <= limit => {}
        count => return Err(SpanningError::TooManyTrees { count, limit }),
    }
    Ok(SpanningTrees {
        g,
        stack: vec![(0, Vec::new())],
    })
}

pub struct SpanningTrees<'a> {
    g: &'a Graph,
    /// `(next edge index, chosen edge indices)`
    stack: Vec<(usize, Vec<usize>)>,
}

impl SpanningTrees<'_> {
    fn components(&self, edges: impl Iterator<Item = usize>) -> usize {
        let mut dsu = Dsu::new(self.g.order());
        let all = self.g.edges();
        edges
            .filter(|&e| dsu.union(all[e].0, all[e].1))
            .count();
        dsu.sets
    }
}

impl Iterator for SpanningTrees<'_> {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        let edges = self.g.edges();
        let n = self.g.order();
        while let Some((i, chosen)) = self.stack.pop() {
            if chosen.len() + 1 == n || n == 1 {
                let tree = Graph::new(n, chosen.iter().map(|&e| edges[e]))
                    .expect("subset of a simple graph");
                return Some(tree);
            }
            if i == edges.len() {
                continue;
            }
            if self.components(chosen.iter().copied().chain(i + 1..edges.len())) == 1 {
                self.stack.push((i + 1, chosen.clone()));
            }
            if self.components(chosen.iter().copied().chain([i])) + chosen.len() + 1 == n {
                let mut with = chosen;
                with.push(i);
                self.stack.push((i + 1, with));
            }
        }
        None
    }
}

struct Dsu {
    parent: Vec<usize>,
    sets: usize,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            sets: n,
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
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        self.sets -= 1;
        true
    }
}

#[derive(Debug, Clone)]
pub struct SpanningMin {
    pub value: Cost,
    /// First tree in enumeration order attaining `value`.
    pub tree: Graph,
    pub trees_examined: u64,
}

/// `min { γ_Bk(T) : T a spanning tree of g }`.
///
/// Trees are solved in batches on `config.workers` threads; every tree in a
/// batch only searches below the minimum known before the batch, so the
/// value and the reported tree do not depend on scheduling.
pub fn min_over_spanning_trees(
    g: &Graph,
    k: Power,
    config: &SolverConfig,
) -> Result<SpanningMin, SpanningError> {
    min_over_spanning_trees_limited(g, k, config, DEFAULT_TREE_LIMIT)
}

pub fn min_over_spanning_trees_limited(
    g: &Graph,
    k: Power,
    config: &SolverConfig,
    limit: u128,
) -> Result<SpanningMin, SpanningError> {
    const BATCH: usize = 256;
    let mut trees = enumerate_spanning_trees_limited(g, limit)?;
    let per_tree = SolverConfig {
        workers: 1,
        ..config.clone()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .expect("thread pool");
    let first = trees.next().expect("connected graphs have a spanning tree");
    let mut best = SpanningMin {
        value: gamma_bk_with(&first, k, &per_tree)?.value,
        tree: first,
        trees_examined: 1,
    };
    loop {
        let batch: Vec<Graph> = trees.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return Ok(best);
        }
        let cutoff = best.value;
        let values: Vec<Result<Option<Cost>, SolveError>> = pool.install(|| {
            batch
                .par_iter()
                .map(|t| Ok(gamma_bk_below(t, k, cutoff, &per_tree)?.map(|r| r.value)))
                .collect()
        });
        best.trees_examined += batch.len() as u64;
        for (tree, value) in batch.into_iter().zip(values) {
            if let Some(v) = value? {
                if v < best.value {
                    best.value = v;
                    best.tree = tree;
                }
            }
        }
    }
}

/// Comparison of γ_Bk(G) with its minimum over spanning trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningReport {
    pub graph_value: Cost,
    pub tree_min: Cost,
    pub equal: bool,
}

/// Fails fast with [`SpanningError::TooManyTrees`] before solving anything.
pub fn spanning_report(
    g: &Graph,
    k: Power,
    config: &SolverConfig,
    limit: u128,
) -> Result<(SpanningReport, SpanningMin), SpanningError> {
    enumerate_spanning_trees_limited(g, limit)?;
    let graph_value = gamma_bk_with(g, k, config)?.value;
    let min = min_over_spanning_trees_limited(g, k, config, limit)?;
    let report = SpanningReport {
        graph_value,
        tree_min: min.value,
        equal: graph_value == min.value,
    };
    Ok((report, min))
}

/// Shortest-path tree of the ball `B(root, power)`, pruned as extraction proceeds.
#[derive(Debug, Clone)]
pub struct BallTree {
    pub root: Vertex,
    pub power: Power,
    /// `parent[x]` for members other than the root; `None` elsewhere.
    parent: Vec<Option<Vertex>>,
    /// Depth (graph distance from the root) of each member.
    depth: Vec<Option<u32>>,
    children: Vec<Vec<Vertex>>,
}

impl BallTree {
    /// BFS ball with the smallest-id parent for every vertex.
    fn grow(g: &Graph, root: Vertex, power: Power) -> Self {
        let n = g.order();
        let mut t = BallTree {
            root,
            power,
            parent: vec![None; n],
            depth: vec![None; n],
            children: vec![Vec::new(); n],
        };
        t.depth[root] = Some(0);
        let mut layer = vec![root];
        for d in 1..=power {
            let mut next = BTreeSet::new();
            for &u in &layer {
                for &w in g.neighbors(u) {
                    if t.depth[w].is_none() {
                        next.insert(w);
                    }
                }
            }
            for &w in &next {
                let p = *g
                    .neighbors(w)
                    .iter()
                    .find(|&&p| t.depth[p] == Some(d - 1))
                    .unwrap();
                t.depth[w] = Some(d);
                t.parent[w] = Some(p);
                t.children[p].push(w);
            }
            layer = next.into_iter().collect();
        }
        for c in &mut t.children {
            c.sort_unstable();
        }
        t
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.depth[x].is_some()
    }

    /// Graph distance from the root, for members.
    pub fn depth(&self, x: Vertex) -> Option<u32> {
        self.depth[x]
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        (0..self.depth.len()).filter(|&x| self.contains(x)).collect()
    }

    /// Tree edges `(parent, child)` sorted by child.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        (0..self.parent.len())
            .filter_map(|x| self.parent[x].map(|p| (p, x)))
            .collect()
    }

    /// Members of the subtree rooted at `x`, `x` first.
    fn subtree(&self, x: Vertex) -> Vec<Vertex> {
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Distance from `x` to the farthest leaf below it.
    fn height_below(&self, x: Vertex) -> u32 {
        let base = self.depth[x].unwrap();
        self.subtree(x)
            .iter()
            .map(|&y| self.depth[y].unwrap() - base)
            .max()
            .unwrap()
    }

    fn delete_subtree(&mut self, x: Vertex) {
        debug_assert_ne!(x, self.root);
        if let Some(p) = self.parent[x] {
            self.children[p].retain(|&c| c != x);
        }
        for y in self.subtree(x) {
            self.parent[y] = None;
            self.depth[y] = None;
            self.children[y].clear();
        }
    }
}

/// A spanning tree of `g` on which `f` is still dominating, built from the
/// ball trees of the broadcasters.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub tree: Graph,
    /// The pruned ball trees in processing order (ascending power, then id).
    pub parts: Vec<BallTree>,
    /// Edges of `g` added to join the parts, sorted.
    pub connecting_edges: Vec<(Vertex, Vertex)>,
}

/// Builds a spanning tree `H` with `f` dominating on `H`.
///
/// Broadcasters are processed by ascending power (ties by id). Each gets the
/// BFS tree of its ball. A broadcaster lying in another ball tree has the
/// subtree below it cut from that tree; if it is captured by a later, more
/// powerful ball whose subtree under it is at least as deep as its own
/// power, the broadcaster is redundant and `f` was not optimal. Remaining
/// overlaps are resolved layer by layer from each root: at a shared vertex
/// `x` the earlier tree gives up its subtree under `x` when that subtree is
/// no deeper than the later tree's, otherwise the later tree gives it up.
/// The pruned trees partition `V(g)` and are joined by the smallest edges of
/// `g` that connect different parts.
pub fn extract_broadcast_tree(
    g: &Graph,
    f: &BroadcastFunction,
    k: Power,
) -> Result<Extraction, SpanningError> {
    if k < 3 {
        return Err(SpanningError::InvalidK(k));
    }
    if f.k() != k {
        return Err(SpanningError::CapMismatch {
            expected: k,
            found: f.k(),
        });
    }
    g.require_connected()?;
    if let Some(v) = first_undominated(g, f)? {
        return Err(SolveError::NotDominating(v).into());
    }
    let optimum = gamma_bk_with(g, k, &SolverConfig::default())?.value;
    if f.cost() != optimum {
        return Err(SolveError::NotOptimal {
            cost: f.cost(),
            optimum,
        }
        .into());
    }

    let mut order = f.assignments();
    order.sort_by_key(|&(v, p)| (p, v));
    let mut parts: Vec<BallTree> = order.iter().map(|&(v, p)| BallTree::grow(g, v, p)).collect();
    let m = parts.len();

    for i in 0..m {
        let vi = parts[i].root;
        for l in 0..m {
            if l == i || !parts[l].contains(vi) {
                continue;
            }
            if i < l && parts[i].power <= parts[l].height_below(vi) {
                return Err(SpanningError::Redundant {
                    dropped: vi,
                    kept: parts[l].root,
                });
            }
            parts[l].delete_subtree(vi);
        }
    }

    for i in 1..m {
        for j in 1..=parts[i].power {
            let layer: Vec<Vertex> = (0..g.order())
                .filter(|&x| parts[i].depth(x) == Some(j))
                .collect();
            for x in layer {
                if !parts[i].contains(x) {
                    // removed with an earlier subtree of this layer's ancestors
                    continue;
                }
                let Some(r) = (0..i).find(|&r| parts[r].contains(x)) else {
                    continue;
                };
                let d_r = parts[r].height_below(x);
                let d_i = parts[i].height_below(x);
                if d_r <= d_i {
                    parts[r].delete_subtree(x);
                } else {
                    parts[i].delete_subtree(x);
                }
            }
        }
    }

    check_partition(g, &parts)?;

    let mut dsu = Dsu::new(g.order());
    let mut tree_edges = Vec::with_capacity(g.order().saturating_sub(1));
    for part in &parts {
        for (p, c) in part.edges() {
            dsu.union(p, c);
            tree_edges.push((p.min(c), p.max(c)));
        }
    }
    let mut connecting_edges = Vec::new();
    for &(u, v) in g.edges() {
        if dsu.union(u, v) {
            connecting_edges.push((u, v));
        }
    }
    tree_edges.extend_from_slice(&connecting_edges);
    let tree = Graph::new(g.order(), tree_edges).expect("edges of g");
    if !tree.is_tree() {
        return Err(SpanningError::Invariant("the spanning-tree property"));
    }
    if first_undominated(&tree, f)?.is_some() {
        return Err(SpanningError::Invariant("domination on the extracted tree"));
    }
    Ok(Extraction {
        tree,
        parts,
        connecting_edges,
    })
}

fn check_partition(g: &Graph, parts: &[BallTree]) -> Result<(), SpanningError> {
    let mut owner = vec![None; g.order()];
    for (i, part) in parts.iter().enumerate() {
        for x in part.vertices() {
            if owner[x].replace(i).is_some() {
                return Err(SpanningError::Invariant("pairwise disjointness"));
            }
            if part.depth(x).unwrap() > part.power {
                return Err(SpanningError::Invariant("the depth bound"));
            }
        }
        if !part.contains(part.root) {
            return Err(SpanningError::Invariant("root membership"));
        }
    }
    if owner.iter().any(Option::is_none) {
        return Err(SpanningError::Invariant("coverage of every vertex"));
    }
    Ok(())
}
