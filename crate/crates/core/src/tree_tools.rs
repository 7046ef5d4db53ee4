//! Trees: generators, the twin-free reduction, and exhaustive enumeration
//! of non-isomorphic free trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::{Power, Vertex};

/// Largest order accepted by [`enumerate_free_trees`].
pub const MAX_ENUMERATION_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("input is not a tree")]
    NotATree,
    #[error("tree has {0} vertices; at least 3 are required")]
    TooSmall(usize),
    #[error("the extremal family needs k >= 3 (got {0})")]
    InvalidK(Power),
    #[error("invalid family parameters: {0}")]
    InvalidSpec(String),
    #[error("free-tree enumeration supports 1 <= n <= {MAX_ENUMERATION_ORDER} (got {0})")]
    EnumerationGuard(usize),
}

/// A request for one member of a generated family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeFamilySpec {
    Path { n: usize },
    /// A centre with one pendant path per entry of `legs`.
    Spider { legs: Vec<usize> },
    /// Uniform labelled tree decoded from a seeded random Prüfer sequence.
    RandomTree { n: usize, seed: u64 },
    /// The tree T_k: spine `u_1..u_{2k+1}` with leaves at `u_1`, `u_{2k+1}` and every even `u_i`.
    ExtremalTk { k: Power },
}

pub fn gen_family(spec: &TreeFamilySpec) -> Result<Graph, TreeError> {
    match spec {
        TreeFamilySpec::Path { n } => {
            if *n == 0 {
                return Err(TreeError::InvalidSpec("a path needs n >= 1".into()));
            }
            Ok(Graph::path(*n))
        }
        TreeFamilySpec::Spider { legs } => spider(legs),
        TreeFamilySpec::RandomTree { n, seed } => random_tree(*n, *seed),
        TreeFamilySpec::ExtremalTk { k } => gen_extremal_tk(*k),
    }
}

fn spider(legs: &[usize]) -> Result<Graph, TreeError> {
    if legs.is_empty() || legs.contains(&0) {
        return Err(TreeError::InvalidSpec(
            "a spider needs at least one leg, each of length >= 1".into(),
        ));
    }
    let mut edges = Vec::new();
    let mut next = 1;
    for &len in legs {
        let mut prev = 0;
        for _ in 0..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    Ok(Graph::new(next, edges)?)
}

/// T_k on `3k + 3` vertices. Spine `u_1..u_{2k+1}` gets ids `0..=2k`; the
/// hung leaves follow in spine order.
pub fn gen_extremal_tk(k: Power) -> Result<Graph, TreeError> {
    if k < 3 {
        return Err(TreeError::InvalidK(k));
    }
    let spine = 2 * k as usize + 1;
    let mut edges: Vec<(Vertex, Vertex)> = (1..spine).map(|i| (i - 1, i)).collect();
    let mut next = spine;
    for i in 1..=spine {
        if i == 1 || i == spine || i % 2 == 0 {
            edges.push((i - 1, next));
            next += 1;
        }
    }
    Ok(Graph::new(next, edges)?)
}

/// Decodes a Prüfer sequence over `0..n` (length `n - 2`) into a labelled tree.
pub fn prufer_decode(n: usize, sequence: &[Vertex]) -> Result<Graph, TreeError> {
    if n < 2 || sequence.len() != n - 2 || sequence.iter().any(|&x| x >= n) {
        return Err(TreeError::InvalidSpec(format!(
            "a Prüfer sequence for n = {n} has n - 2 entries in 0..n"
        )));
    }
    let mut degree = vec![1usize; n];
    for &x in sequence {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = degree.iter().position(|&d| d == 1).unwrap();
    let mut leaf = ptr;
    for &x in sequence {
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n - 1));
    Ok(Graph::new(n, edges)?)
}

/// Uniformly random labelled tree on `n` vertices, reproducible from `seed`.
pub fn random_tree(n: usize, seed: u64) -> Result<Graph, TreeError> {
    match n {
        0 => Err(TreeError::InvalidSpec("a tree needs n >= 1".into())),
        1 | 2 => Ok(Graph::path(n)),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
            prufer_decode(n, &seq)
        }
    }
}

/// Random connected graph: a random tree plus each remaining pair as an
/// edge with probability `extra_edge_probability`.
pub fn random_connected_graph(
    n: usize,
    extra_edge_probability: f64,
    seed: u64,
) -> Result<Graph, TreeError> {
    let tree = random_tree(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges = tree.edges().to_vec();
    for u in 0..n {
        for v in u + 1..n {
            if !tree.has_edge(u, v) && rng.gen_bool(extra_edge_probability) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges)?)
}

/// The twin-free tree T*: every class of leaves sharing a support vertex is
/// cut down to its smallest-id member. Surviving vertices keep their
/// relative order.
pub fn twin_free_reduce(t: &Graph) -> Result<Graph, TreeError> {
    if !t.is_tree() {
        return Err(TreeError::NotATree);
    }
    if t.order() < 3 {
        return Err(TreeError::TooSmall(t.order()));
    }
    let structure = t.structure()?;
    let mut keep = vec![true; t.order()];
    for class in &structure.twin_classes {
        for &extra in &class[1..] {
            keep[extra] = false;
        }
    }
    let survivors: Vec<Vertex> = (0..t.order()).filter(|&v| keep[v]).collect();
    Ok(t.induced_subgraph(&survivors).0)
}

/// AHU string of the tree rooted at `root`: `(` children sorted `)`.
fn rooted_code(t: &Graph, root: Vertex) -> Vec<u8> {
    fn code(t: &Graph, v: Vertex, parent: Option<Vertex>) -> Vec<u8> {
        let mut children: Vec<Vec<u8>> = t
            .neighbors(v)
            .iter()
            .filter(|&&w| Some(w) != parent)
            .map(|&w| code(t, w, Some(v)))
            .collect();
        children.sort_unstable();
        let mut out = Vec::with_capacity(2 + children.iter().map(Vec::len).sum::<usize>());
        out.push(b'(');
        for c in children {
            out.extend(c);
        }
        out.push(b')');
        out
    }
    code(t, root, None)
}

/// Isomorphism-invariant string for a tree: the largest AHU code over its centres.
pub fn canonical_tree_code(t: &Graph) -> Result<String, TreeError> {
    if !t.is_tree() {
        return Err(TreeError::NotATree);
    }
    let centers = t.metrics()?.centers;
    let best = centers.iter().map(|&c| rooted_code(t, c)).max().unwrap();
    Ok(String::from_utf8(best).expect("ascii"))
}

/// Tree from a level sequence (preorder depths, root at depth 0). Vertex ids follow preorder.
pub fn tree_from_levels(levels: &[u32]) -> Graph {
    let mut edges = Vec::with_capacity(levels.len().saturating_sub(1));
    // last vertex seen at each depth
    let mut last_at: Vec<Vertex> = Vec::new();
    for (v, &d) in levels.iter().enumerate() {
        let d = d as usize;
        if d > 0 {
            edges.push((last_at[d - 1], v));
        }
        last_at.truncate(d);
        last_at.push(v);
    }
    Graph::new(levels.len(), edges).expect("level sequences describe trees")
}

/// Every tree on `n` vertices exactly once up to isomorphism.
///
/// Rooted trees are produced in canonical level-sequence form (successor
/// rule of Beyer and Hedetniemi); a rooted tree is kept only when its root is
/// a centre and, for trees with two centres, when rooting at this centre
/// gives the larger AHU code of the two.
pub fn enumerate_free_trees(n: usize) -> Result<FreeTrees, TreeError> {
    if n == 0 || n > MAX_ENUMERATION_ORDER {
        return Err(TreeError::EnumerationGuard(n));
    }
    Ok(FreeTrees {
        levels: Some((0..n as u32).collect()),
    })
}

pub struct FreeTrees {
    levels: Option<Vec<u32>>,
}

impl FreeTrees {
    fn advance(&mut self) {
        let Some(levels) = self.levels.as_mut() else { return };
        // last position deeper than a child of the root
        let Some(p) = levels.iter().rposition(|&d| d > 1) else {
            self.levels = None;
            return;
        };
        let q = levels[..p].iter().rposition(|&d| d == levels[p] - 1).unwrap();
        let shift = p - q;
        for i in p..levels.len() {
            levels[i] = levels[i - shift];
        }
    }

    fn keep(levels: &[u32]) -> Option<Graph> {
        let t = tree_from_levels(levels);
        let centers = t.metrics().expect("trees are connected").centers;
        if !centers.contains(&0) {
            return None;
        }
        if let [a, b] = centers[..] {
            let other = if a == 0 { b } else { a };
            if rooted_code(&t, 0) < rooted_code(&t, other) {
                return None;
            }
        }
        Some(t)
    }
}

impl Iterator for FreeTrees {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        loop {
            let levels = self.levels.clone()?;
            self.advance();
            if let Some(t) = Self::keep(&levels) {
                return Some(t);
            }
        }
    }
}
