//! Branch-and-bound for γ_Bk over bitset vertex sets.
//!
//! Each search node holds the set `U` of vertices nobody reaches yet. The
//! solver picks the vertex of `U` farthest from the reached part of the
//! graph and branches over every ball `(v, p)` containing it, with `v` not
//! yet powered and `d(u, v) <= p <= k`. Balls whose new coverage is contained
//! in that of a ball no more expensive are skipped.
//!
//! Lower bounds (the largest of the three is used):
//! * packing: uncovered vertices pairwise more than `2k` apart need one broadcaster each;
//! * clustered packing: vertices pairwise more than `2(k-1)` apart, grouped by
//!   the "within `2k`" relation; a group of size `s` costs at least `min(s, k)`;
//! * fractional charging: each uncovered vertex pays at least the cheapest
//!   `p / |B(v, p) ∩ U|` over the balls containing it.

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bitset::{with_vertex_set, VertexSet};
use crate::graph::{DistanceMatrix, Graph};
use crate::solver::{BroadcastFunction, Method, SolveError, SolveResult, SolveStats};
use crate::{Cost, Power, Vertex};

/// Knobs for [`gamma_bk_with`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Worker threads for the root split. `1` gives a deterministic witness.
    pub workers: usize,
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Search with powers up to `min(k, rad)` only. Disabling it is only
    /// useful to cross-check the stabilisation of γ_Bk at the radius.
    pub clamp_to_radius: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            max_nodes: None,
            time_limit: None,
            clamp_to_radius: true,
        }
    }
}

impl SolverConfig {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// Exact γ_Bk with the default configuration.
pub fn gamma_bk(g: &Graph, k: Power) -> Result<SolveResult, SolveError> {
    gamma_bk_with(g, k, &SolverConfig::default())
}

pub fn gamma_bk_with(g: &Graph, k: Power, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve(g, k, None, config).map(|r| r.expect("unbounded search always finds a broadcast"))
}

/// Searches only for broadcasts of cost strictly below `cutoff`.
/// Returns `None` when γ_Bk >= cutoff.
pub fn gamma_bk_below(
    g: &Graph,
    k: Power,
    cutoff: Cost,
    config: &SolverConfig,
) -> Result<Option<SolveResult>, SolveError> {
    solve(g, k, Some(cutoff), config)
}

fn solve(
    g: &Graph,
    k: Power,
    cutoff: Option<Cost>,
    config: &SolverConfig,
) -> Result<Option<SolveResult>, SolveError> {
    let started = Instant::now();
    if k == 0 {
        return Err(SolveError::ZeroCap);
    }
    let metrics = g.metrics()?;
    let search_cap = if config.clamp_to_radius {
        k.min(metrics.radius.max(1))
    } else {
        k
    };
    let outcome = with_vertex_set!(g.order(), Set => {
        let inst = Instance::<Set>::new(g, search_cap, &metrics.eccentricity);
        inst.run(cutoff, config, started)
    })?;
    Ok(outcome.best.map(|(value, pairs)| SolveResult {
        value,
        witness: BroadcastFunction::from_assignments(g.order(), k, &pairs)
            .expect("search powers never exceed the cap"),
        stats: SolveStats {
            nodes: outcome.nodes,
            method: Method::Bnb,
            elapsed: started.elapsed(),
        },
    }))
}

struct Outcome {
    best: Option<(Cost, Vec<(Vertex, Power)>)>,
    nodes: u64,
}

struct Instance<'g, S> {
    n: usize,
    cap: Power,
    dist: &'g DistanceMatrix,
    /// `balls[v][p - 1] = B(v, p)` for `1 <= p <= max_power[v]`.
    balls: Vec<Vec<S>>,
    max_power: Vec<Power>,
    /// Order in which packings pick vertices: smallest `|B(u, cap)|` first.
    packing_order: Vec<Vertex>,
    /// Branching vertex while nothing is covered yet.
    first_branch: Vertex,
    centers: Vec<Vertex>,
    radius: Power,
}

#[derive(Clone, Copy)]
struct Choice {
    v: Vertex,
    p: Power,
    gain: u32,
}

/// Cost and broadcaster list of the best broadcast found so far.
type Incumbent = (Cost, Vec<(Vertex, Power)>);

/// Mutable search state shared (by reference) between workers.
struct Shared {
    best_cost: AtomicU32,
    best: Mutex<Option<Incumbent>>,
    nodes: AtomicU64,
    aborted: AtomicBool,
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
}

impl Shared {
    fn offer(&self, cost: Cost, pairs: &[(Vertex, Power)]) {
        let mut best = self.best.lock().unwrap();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            *best = Some((cost, pairs.to_vec()));
            self.best_cost.fetch_min(cost, Ordering::SeqCst);
        }
    }
}

struct Worker<'a, 'g, S> {
    inst: &'a Instance<'g, S>,
    shared: &'a Shared,
    assigned: Vec<Power>,
    path: Vec<(Vertex, Power)>,
    nodes: u64,
}

impl<'g, S: VertexSet> Instance<'g, S> {
    fn new(g: &'g Graph, cap: Power, eccentricity: &[u32]) -> Self {
        let n = g.order();
        let dist = g.distances();
        let max_power: Vec<Power> = eccentricity.iter().map(|&e| cap.min(e.max(1))).collect();
        let balls = (0..n)
            .map(|v| {
                (1..=max_power[v])
                    .map(|p| {
                        let mut b = S::empty(n);
                        for u in 0..n {
                            if dist.within(u, v, p) {
                                b.insert(u);
                            }
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        let reach: Vec<usize> = (0..n)
            .map(|u| (0..n).filter(|&w| dist.within(u, w, cap)).count())
            .collect();
        let mut packing_order: Vec<Vertex> = (0..n).collect();
        packing_order.sort_by_key(|&u| (reach[u], u));
        let first_branch = (0..n)
            .max_by_key(|&u| (eccentricity[u], std::cmp::Reverse(u)))
            .unwrap();
        let radius = *eccentricity.iter().min().unwrap();
        let centers = (0..n).filter(|&v| eccentricity[v] == radius).collect();
        Self {
            n,
            cap,
            dist,
            balls,
            max_power,
            packing_order,
            first_branch,
            centers,
            radius,
        }
    }

    #[inline]
    fn ball(&self, v: Vertex, p: Power) -> &S {
        &self.balls[v][p as usize - 1]
    }

    /// Greedy cover: best new-coverage per unit of power, ties by smaller power then smaller vertex.
    fn greedy(&self) -> (Cost, Vec<(Vertex, Power)>) {
        let mut uncovered = S::full(self.n);
        let mut used = vec![false; self.n];
        let mut pairs = Vec::new();
        while !uncovered.is_empty() {
            let mut pick: Option<Choice> = None;
            for v in (0..self.n).filter(|&v| !used[v]) {
                for p in 1..=self.max_power[v] {
                    let gain = self.ball(v, p).intersection_len(&uncovered);
                    let better = match pick {
                        None => gain > 0,
                        Some(c) => {
                            let (lhs, rhs) = (gain as u64 * c.p as u64, c.gain as u64 * p as u64);
                            lhs > rhs || (lhs == rhs && p < c.p)
                        }
                    };
                    if better {
                        pick = Some(Choice { v, p, gain });
                    }
                }
            }
            let c = pick.expect("an unused vertex always covers itself");
            used[c.v] = true;
            uncovered.remove_all(self.ball(c.v, c.p));
            pairs.push((c.v, c.p));
        }
        pairs.sort_unstable();
        let mut cost: Cost = pairs.iter().map(|&(_, p)| p).sum();
        if self.cap >= self.radius.max(1) && self.radius.max(1) < cost {
            pairs = vec![(self.centers[0], self.radius.max(1))];
            cost = self.radius.max(1);
        }
        (cost, pairs)
    }

    fn run(&self, cutoff: Option<Cost>, config: &SolverConfig, started: Instant) -> Result<Outcome, SolveError> {
        let (greedy_cost, greedy_pairs) = self.greedy();
        let shared = Shared {
            best_cost: AtomicU32::new(Cost::MAX),
            best: Mutex::new(None),
            nodes: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
            max_nodes: config.max_nodes,
            deadline: config.time_limit.map(|t| started + t),
        };
        match cutoff {
            Some(c) if greedy_cost >= c => shared.best_cost.store(c, Ordering::SeqCst),
            _ => shared.offer(greedy_cost, &greedy_pairs),
        }

        let full = S::full(self.n);
        let root_lower = self.lower_bound(&full, &vec![0; self.n]);
        let mut root = Worker::new(self, &shared);
        if config.workers <= 1 {
            root.search(&full, 0);
            shared.nodes.fetch_add(root.nodes, Ordering::SeqCst);
        } else {
            root.nodes += 1;
            let u = self.first_branch;
            let choices = root.choices(&full, u);
            shared.nodes.fetch_add(root.nodes, Ordering::SeqCst);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .expect("thread pool");
            pool.install(|| {
                choices.par_iter().for_each(|c| {
                    let mut w = Worker::new(self, &shared);
                    if c.p < shared.best_cost.load(Ordering::SeqCst) {
                        let mut rest = full.clone();
                        rest.remove_all(self.ball(c.v, c.p));
                        w.push(c.v, c.p);
                        w.search(&rest, c.p);
                    }
                    shared.nodes.fetch_add(w.nodes, Ordering::SeqCst);
                });
            });
        }

        let nodes = shared.nodes.load(Ordering::SeqCst);
        let best = shared.best.into_inner().unwrap();
        if shared.aborted.load(Ordering::SeqCst) {
            return Err(SolveError::Guard {
                nodes,
                upper: best.as_ref().map_or(Cost::MAX, |b| b.0),
                lower: root_lower,
            });
        }
        Ok(Outcome { best, nodes })
    }

    fn lower_bound(&self, uncovered: &S, assigned: &[Power]) -> Cost {
        if uncovered.is_empty() {
            return 0;
        }
        let spread = self.packing_bound(uncovered, 2 * self.cap);
        let clustered = self.clustered_bound(uncovered);
        let fractional = self.fractional_bound(uncovered, assigned);
        spread.max(clustered).max(fractional)
    }

    /// Greedy set of uncovered vertices pairwise farther apart than `gap`.
    fn packing(&self, uncovered: &S, gap: Power) -> Vec<Vertex> {
        let mut chosen: Vec<Vertex> = Vec::new();
        for &u in &self.packing_order {
            if uncovered.contains(u) && chosen.iter().all(|&w| !self.dist.within(u, w, gap)) {
                chosen.push(u);
            }
        }
        chosen
    }

    fn packing_bound(&self, uncovered: &S, gap: Power) -> Cost {
        self.packing(uncovered, gap).len() as Cost
    }

    fn clustered_bound(&self, uncovered: &S) -> Cost {
        let spread = self.packing(uncovered, 2 * (self.cap - 1));
        let m = spread.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..m {
            for j in i + 1..m {
                if self.dist.within(spread[i], spread[j], 2 * self.cap) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut sizes = vec![0 as Cost; m];
        for i in 0..m {
            let r = find(&mut parent, i);
            sizes[r] += 1;
        }
        sizes.into_iter().map(|s| s.min(self.cap)).sum()
    }

    fn fractional_bound(&self, uncovered: &S, assigned: &[Power]) -> Cost {
        let mut charge = vec![f64::INFINITY; self.n];
        for v in (0..self.n).filter(|&v| assigned[v] == 0) {
            let mut previous = 0;
            for p in 1..=self.max_power[v] {
                let ball = self.ball(v, p);
                let gain = ball.intersection_len(uncovered);
                if gain == 0 || gain == previous {
                    continue;
                }
                previous = gain;
                let rate = p as f64 / gain as f64;
                for u in ball.iter() {
                    if uncovered.contains(u) && rate < charge[u] {
                        charge[u] = rate;
                    }
                }
            }
        }
        let total: f64 = uncovered.iter().map(|u| charge[u]).sum();
        // round down generously so float noise can never overshoot the true bound
        (total - 1e-6).ceil().max(0.0) as Cost
    }
}

impl<'a, 'g, S: VertexSet> Worker<'a, 'g, S> {
    fn new(inst: &'a Instance<'g, S>, shared: &'a Shared) -> Self {
        Self {
            inst,
            shared,
            assigned: vec![0; inst.n],
            path: Vec::new(),
            nodes: 0,
        }
    }

    fn push(&mut self, v: Vertex, p: Power) {
        self.assigned[v] = p;
        self.path.push((v, p));
    }

    fn pop(&mut self) {
        let (v, _) = self.path.pop().unwrap();
        self.assigned[v] = 0;
    }

    fn guard_tripped(&mut self) -> bool {
        if self.shared.aborted.load(Ordering::Relaxed) {
            return true;
        }
        let tripped = self.shared.max_nodes.is_some_and(|m| {
            self.shared.nodes.load(Ordering::Relaxed) + self.nodes > m
        }) || (self.nodes.is_multiple_of(1024)
            && self.shared.deadline.is_some_and(|d| Instant::now() > d));
        if tripped {
            self.shared.aborted.store(true, Ordering::Relaxed);
        }
        tripped
    }

    fn search(&mut self, uncovered: &S, cost: Cost) {
        self.nodes += 1;
        if self.guard_tripped() {
            return;
        }
        if uncovered.is_empty() {
            if cost < self.shared.best_cost.load(Ordering::SeqCst) {
                let mut pairs = self.path.clone();
                pairs.sort_unstable();
                self.shared.offer(cost, &pairs);
            }
            return;
        }
        let best = self.shared.best_cost.load(Ordering::SeqCst);
        if cost + self.inst.lower_bound(uncovered, &self.assigned) >= best {
            return;
        }
        let u = self.branch_vertex(uncovered);
        for c in self.choices(uncovered, u) {
            if cost + c.p >= self.shared.best_cost.load(Ordering::SeqCst) {
                continue;
            }
            let mut rest = uncovered.clone();
            rest.remove_all(self.inst.ball(c.v, c.p));
            self.push(c.v, c.p);
            self.search(&rest, cost + c.p);
            self.pop();
        }
    }

    /// Uncovered vertex farthest from the covered set; ties by smallest id.
    fn branch_vertex(&self, uncovered: &S) -> Vertex {
        let inst = self.inst;
        if uncovered.len() as usize == inst.n {
            return inst.first_branch;
        }
        let covered: Vec<Vertex> = (0..inst.n).filter(|&w| !uncovered.contains(w)).collect();
        let mut pick = (0, usize::MAX);
        for u in uncovered.iter() {
            let d = covered
                .iter()
                .filter_map(|&w| inst.dist.get(u, w))
                .min()
                .unwrap_or(u32::MAX);
            if pick.1 == usize::MAX || d > pick.0 {
                pick = (d, u);
            }
        }
        pick.1
    }

    /// Non-dominated balls around unpowered vertices that reach `u`,
    /// best coverage-per-power first.
    fn choices(&self, uncovered: &S, u: Vertex) -> Vec<Choice> {
        let inst = self.inst;
        let mut all = Vec::new();
        for v in (0..inst.n).filter(|&v| self.assigned[v] == 0) {
            let Some(d) = inst.dist.get(u, v) else { continue };
            for p in d.max(1)..=inst.max_power[v] {
                let gain = inst.ball(v, p).intersection_len(uncovered);
                all.push(Choice { v, p, gain });
            }
        }
        let dominated = |a: &Choice| {
            all.iter().any(|b| {
                let cheaper_or_equal = b.p <= a.p && b.gain >= a.gain;
                let strictly = b.p < a.p || b.gain > a.gain || b.v < a.v;
                (b.v, b.p) != (a.v, a.p)
                    && cheaper_or_equal
                    && strictly
                    && inst.ball(a.v, a.p).subset_within(inst.ball(b.v, b.p), uncovered)
            })
        };
        let mut kept: Vec<Choice> = all.iter().copied().filter(|a| !dominated(a)).collect();
        kept.sort_by(|a, b| {
            let (lhs, rhs) = (b.gain as u64 * a.p as u64, a.gain as u64 * b.p as u64);
            lhs.cmp(&rhs).then(a.p.cmp(&b.p)).then(a.v.cmp(&b.v))
        });
        kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{gamma_bk_oracle, is_dominating};

    #[test]
    fn closed_form_and_small_values() {
        assert_eq!(gamma_bk(&Graph::path(12), 3).unwrap().value, 4);
        assert_eq!(gamma_bk(&Graph::path(7), 2).unwrap().value, 3);
        assert_eq!(gamma_bk(&Graph::cycle(6), 2).unwrap().value, 2);
        let k1 = Graph::new(1, []).unwrap();
        for k in [1, 2, 7] {
            let r = gamma_bk(&k1, k).unwrap();
            assert_eq!(r.value, 1);
            assert_eq!(r.witness.values(), &[1]);
        }
    }

    #[test]
    fn witness_respects_caller_cap() {
        // k far above the radius: search is clamped, witness still carries k
        let r = gamma_bk(&Graph::path(9), 50).unwrap();
        assert_eq!(r.value, 3);
        assert_eq!(r.witness.k(), 50);
        assert!(is_dominating(&Graph::path(9), &r.witness).unwrap());
    }

    #[test]
    fn matches_oracle_on_small_graphs() {
        let graphs = [
            Graph::path(8),
            Graph::cycle(7),
            Graph::star(4),
            Graph::complete(5),
            Graph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]).unwrap(),
        ];
        for g in &graphs {
            for k in 1..=3 {
                let fast = gamma_bk(g, k).unwrap();
                assert_eq!(fast.value, gamma_bk_oracle(g, k).unwrap().value);
                assert_eq!(fast.witness.cost(), fast.value);
                assert!(is_dominating(g, &fast.witness).unwrap());
            }
        }
    }

    #[test]
    fn parallel_value_matches_serial() {
        let g = Graph::path(20);
        let serial = gamma_bk(&g, 2).unwrap();
        let parallel = gamma_bk_with(&g, 2, &SolverConfig::default().with_workers(3)).unwrap();
        assert_eq!(serial.value, parallel.value);
        assert!(is_dominating(&g, &parallel.witness).unwrap());
    }

    #[test]
    fn cutoff_search() {
        let g = Graph::path(9);
        let cfg = SolverConfig::default();
        assert!(gamma_bk_below(&g, 1, 3, &cfg).unwrap().is_none());
        assert_eq!(gamma_bk_below(&g, 1, 4, &cfg).unwrap().unwrap().value, 3);
    }

    #[test]
    fn node_guard_reports_progress() {
        let g = Graph::cycle(30);
        let cfg = SolverConfig {
            max_nodes: Some(0),
            ..SolverConfig::default()
        };
        match gamma_bk_with(&g, 1, &cfg) {
            Err(SolveError::Guard { upper, lower, .. }) => {
                assert!(lower <= 10 && upper >= 10);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn unclamped_search_agrees() {
        let g = Graph::cycle(9);
        let cfg = SolverConfig {
            clamp_to_radius: false,
            ..SolverConfig::default()
        };
        assert_eq!(
            gamma_bk_with(&g, 8, &cfg).unwrap().value,
            gamma_bk(&g, 8).unwrap().value
        );
    }
}
