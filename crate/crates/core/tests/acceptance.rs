//! Acceptance criteria, run in order by a plain `main` so that every
//! criterion prints its `PASS`/`FAIL` line even under `cargo test`.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use kbroadcast::bounds::{audit_chain, audit_tree_bound, upper_bound};
use kbroadcast::sat_reduction::{reduce, verify_reduction, CnfFormula};
use kbroadcast::spanning::{extract_broadcast_tree, min_over_spanning_trees, spanning_tree_count};
use kbroadcast::tree_tools::{
    canonical_tree_code, enumerate_free_trees, gen_extremal_tk, random_connected_graph,
    random_tree, twin_free_reduce,
};
use kbroadcast::{gamma_bk, gamma_bk_oracle, is_dominating, Graph, SolverConfig};

static FAILED: AtomicBool = AtomicBool::new(false);

fn main() {
    let criteria: [fn(); 12] = [
        c01_path_closed_form,
        c02_extremal_family,
        c03_tree_bound_audit,
        c04_corollary_endpoints,
        c05_chain,
        c06_spanning_equality,
        c07_extraction,
        c08_twin_invariance,
        c09_reduction_structure,
        c10_reduction_equivalence,
        c11_oracle_equivalence,
        c12_free_tree_counts,
    ];
    for (i, criterion) in criteria.into_iter().enumerate() {
        if std::panic::catch_unwind(criterion).is_err() {
            println!("[FAIL] {:>2} panicked", i + 1);
            FAILED.store(true, Ordering::Relaxed);
        }
    }
    if FAILED.load(Ordering::Relaxed) {
        std::process::exit(1);
    }
}

fn report(id: u32, name: &str, started: Instant, failures: &[String], detail: &str) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] {id:>2} {name}: {detail} ({:.2?})",
        started.elapsed()
    );
    for f in failures.iter().take(10) {
        println!("       {f}");
    }
    if !failures.is_empty() {
        FAILED.store(true, Ordering::Relaxed);
    }
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

/// Deterministic corpus of random connected graphs with orders cycling through `orders`.
fn corpus(count: usize, orders: std::ops::RangeInclusive<usize>, salt: u64) -> Vec<Graph> {
    let sizes: Vec<usize> = orders.collect();
    (0..count)
        .map(|i| {
            let n = sizes[i % sizes.len()];
            let p = [0.15, 0.3, 0.5][i % 3];
            random_connected_graph(n, p, salt * 100_000 + i as u64).unwrap()
        })
        .collect()
}

fn c01_path_closed_form() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for n in 1..=24usize {
        for k in 1..=5 {
            let got = gamma_bk(&Graph::path(n), k).unwrap().value as usize;
            if got != n.div_ceil(3) {
                failures.push(format!("P_{n}, k={k}: {got} != {}", n.div_ceil(3)));
            }
        }
    }
    report(1, "path closed form", t, &failures, "120 (n, k) pairs");
}

fn c02_extremal_family() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for k in 3..=5u32 {
        let tk = gen_extremal_tk(k).unwrap();
        let got = gamma_bk(&tk, k).unwrap().value;
        if tk.order() != 3 * k as usize + 3 || got != k + 2 {
            failures.push(format!("T_{k}: order {}, value {got}", tk.order()));
        }
    }
    for k in 3..=1_000_000u128 {
        let n = 3 * k + 3;
        let direct = ceil_div((k + 2) * n, 3 * (k + 1));
        let lib = upper_bound(n as u64, k as u64, (k + 1) as u64).unwrap() as u128;
        if direct != k + 2 || lib != k + 2 {
            failures.push(format!("k={k}: direct {direct}, library {lib}"));
        }
    }
    report(2, "extremal family", t, &failures, "k=3,4,5 solved; arithmetic to k=10^6");
}

fn c03_tree_bound_audit() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let report3 = audit_tree_bound(12, 3, &SolverConfig::default()).unwrap();
    for row in &report3.rows {
        let bound = ceil_div(5 * row.n as u128, 12);
        if row.radius <= 3 || row.bound as u128 != bound || row.gamma as u128 > bound {
            failures.push(format!("{row:?}"));
        }
    }
    // independent count of the audited population
    let expected: usize = (1..=12)
        .map(|n| enumerate_free_trees(n).unwrap().filter(|t| t.radius().unwrap() > 3).count())
        .sum();
    if expected != report3.rows.len() {
        failures.push(format!("{} rows for {expected} trees", report3.rows.len()));
    }
    let t3 = canonical_tree_code(&gen_extremal_tk(3).unwrap()).unwrap();
    if !report3.summary.tight.contains(&t3) {
        failures.push("T_3 not reported tight".into());
    }
    let report4 = audit_tree_bound(13, 4, &SolverConfig::default()).unwrap();
    for row in report4.rows.iter().filter(|r| r.gamma as u128 > ceil_div(6 * r.n as u128, 15)) {
        failures.push(format!("{row:?}"));
    }
    let detail = format!(
        "k=3: {} trees, {} violations, {} tight; k=4 to n=13: {} trees, {} violations",
        report3.rows.len(),
        report3.summary.violations,
        report3.summary.tight.len(),
        report4.rows.len(),
        report4.summary.violations,
    );
    report(3, "tree bound audit", t, &failures, &detail);
}

fn c04_corollary_endpoints() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for (i, g) in corpus(500, 2..=10, 4).iter().enumerate() {
        let n = g.order();
        let r = g.radius().unwrap();
        let gamma = gamma_bk(g, 1).unwrap().value as usize;
        let broadcast = gamma_bk(g, r).unwrap().value as usize;
        if gamma > n / 2 || broadcast > n.div_ceil(3) {
            failures.push(format!("graph {i}: n={n} gamma={gamma} gamma_B={broadcast}"));
        }
    }
    report(4, "corollary endpoints", t, &failures, "500 graphs, n<=10");
}

fn c05_chain() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let cfg = SolverConfig::default();
    let unclamped = SolverConfig {
        clamp_to_radius: false,
        ..SolverConfig::default()
    };
    for (i, g) in corpus(300, 2..=9, 5).iter().enumerate() {
        let chain = audit_chain(g, &cfg).unwrap();
        let m = g.metrics().unwrap();
        let last = *chain.chain.last().unwrap();
        // beyond the radius the value must not move
        let stable = (m.radius..=m.diameter.max(1))
            .all(|k| kbroadcast::solver::gamma_bk_with(g, k, &unclamped).unwrap().value == last);
        if !chain.holds() || !stable {
            failures.push(format!("graph {i}: {chain:?}"));
        }
    }
    report(5, "chain monotone and stable at the radius", t, &failures, "300 graphs, n<=9");
}

fn c06_spanning_equality() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let cfg = SolverConfig::default();
    let mut graphs = Vec::new();
    let mut seed = 0;
    while graphs.len() < 200 {
        let n = 3 + graphs.len() % 6;
        let g = random_connected_graph(n, [0.2, 0.4, 0.6][seed as usize % 3], 600_000 + seed).unwrap();
        seed += 1;
        if spanning_tree_count(&g).unwrap() <= 10_000 {
            graphs.push(g);
        }
    }
    let mut trees = 0;
    for (i, g) in graphs.iter().enumerate() {
        for k in [2, 3] {
            let direct = gamma_bk(g, k).unwrap().value;
            let min = min_over_spanning_trees(g, k, &cfg).unwrap();
            trees += min.trees_examined;
            if direct != min.value {
                failures.push(format!("graph {i}, k={k}: {direct} vs {}", min.value));
            }
        }
    }
    let detail = format!("200 graphs, k=2,3, {trees} tree solves");
    report(6, "spanning-tree equality", t, &failures, &detail);
}

fn c07_extraction() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for (i, g) in corpus(100, 4..=12, 7).iter().enumerate() {
        let k = 3 + (i % 3) as u32;
        let solved = gamma_bk(g, k).unwrap();
        match extract_broadcast_tree(g, &solved.witness, k) {
            Ok(ex) => {
                let h = &ex.tree;
                let subgraph = h.edges().iter().all(|&(u, v)| g.has_edge(u, v));
                let dominating = is_dominating(h, &solved.witness).unwrap();
                let value = gamma_bk(h, k).unwrap().value;
                if !h.is_tree() || h.order() != g.order() || !subgraph || !dominating || value > solved.value {
                    failures.push(format!("graph {i}, k={k}: tree {} sub {subgraph} dom {dominating} value {value}", h.is_tree()));
                }
            }
            Err(e) => failures.push(format!("graph {i}, k={k}: {e}")),
        }
    }
    report(7, "extraction soundness", t, &failures, "100 graph/witness pairs, k=3..5");
}

fn c08_twin_invariance() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for i in 0..200u64 {
        let n = 3 + (i % 10) as usize;
        let tree = random_tree(n, 800_000 + i).unwrap();
        let reduced = twin_free_reduce(&tree).unwrap();
        if tree.radius().unwrap() != reduced.radius().unwrap() {
            failures.push(format!("tree {i}: radius changed"));
        }
        for k in [2, 3] {
            let (a, b) = (gamma_bk(&tree, k).unwrap().value, gamma_bk(&reduced, k).unwrap().value);
            if a != b {
                failures.push(format!("tree {i}, k={k}: {a} vs {b}"));
            }
        }
    }
    report(8, "twin invariance", t, &failures, "200 random trees, n<=12");
}

/// All clauses of three distinct literals over `n` variables.
fn all_clauses(n: i32) -> Vec<Vec<i32>> {
    let lits: Vec<i32> = (1..=n).flat_map(|v| [v, -v]).collect();
    let mut out = Vec::new();
    for a in 0..lits.len() {
        for b in a + 1..lits.len() {
            for c in b + 1..lits.len() {
                out.push(vec![lits[a], lits[b], lits[c]]);
            }
        }
    }
    out
}

fn c09_reduction_structure() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut instances = 0;
    for n in 1..=5usize {
        let pool = all_clauses(n as i32);
        for m in 0..=5usize {
            if m > 0 && pool.is_empty() {
                continue;
            }
            let clauses: Vec<Vec<i32>> = (0..m).map(|j| pool[(j * 7 + n) % pool.len()].clone()).collect();
            let formula = CnfFormula::new(n, clauses).unwrap();
            for k in 3..=5u32 {
                instances += 1;
                let kk = k as usize;
                let inst = reduce(&formula, k).unwrap();
                let g = &inst.graph;
                if g.order() != (kk * kk + 2) * n + kk * m || g.size() != (kk * kk + kk) * n + (kk + 2) * m {
                    failures.push(format!("n={n} m={m} k={k}: |V|={} |E|={}", g.order(), g.size()));
                }
                for var in 1..=n {
                    let from_u = g.bfs(inst.positive(var));
                    let from_ub = g.bfs(inst.negative(var));
                    for leaf in inst.gadget_leaves(var) {
                        let from_leaf = g.bfs(leaf);
                        let outside_far = (0..g.order())
                            .filter(|v| !inst.gadget(var).contains(v))
                            .all(|v| from_leaf[v].is_none_or(|d| d > k));
                        if from_u[leaf] != Some(k) || from_ub[leaf] != Some(k) || !outside_far {
                            failures.push(format!("n={n} m={m} k={k}: leaf {leaf} of gadget {var}"));
                        }
                    }
                }
            }
        }
    }
    let detail = format!("{instances} instances");
    report(9, "reduction structure", t, &failures, &detail);
}

fn brute_sat(formula: &CnfFormula) -> bool {
    let n = formula.num_vars();
    (0..1u32 << n).any(|mask| {
        formula.clauses().iter().all(|c| {
            c.iter().any(|&l| (mask >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0))
        })
    })
}

fn c10_reduction_equivalence() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let cfg = SolverConfig::default();
    let mut formulas = vec![CnfFormula::new(1, vec![]).unwrap(), CnfFormula::new(2, vec![]).unwrap()];
    let pool = all_clauses(2);
    for a in &pool {
        formulas.push(CnfFormula::new(2, vec![a.clone()]).unwrap());
        for b in &pool {
            formulas.push(CnfFormula::new(2, vec![a.clone(), b.clone()]).unwrap());
        }
    }
    let every_sign: Vec<Vec<i32>> = (0..8)
        .map(|s| (1..=3).map(|v| if s >> (v - 1) & 1 == 1 { -v } else { v }).collect())
        .collect();
    formulas.push(CnfFormula::new(3, every_sign).unwrap());
    let mut unsat = 0;
    for f in &formulas {
        let v = verify_reduction(f, 3, &cfg).unwrap();
        let sat = brute_sat(f);
        unsat += usize::from(!sat);
        if v.satisfiable != sat || sat != (v.gamma <= 3 * f.num_vars() as u32) || !v.holds() {
            failures.push(format!("{}: {v:?}", f.to_dimacs().replace('\n', " ")));
        }
    }
    let detail = format!("{} formulas ({unsat} unsatisfiable)", formulas.len());
    report(10, "reduction equivalence", t, &failures, &detail);
}

fn c11_oracle_equivalence() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut graphs: Vec<Graph> = (1..=9).flat_map(|n| enumerate_free_trees(n).unwrap()).collect();
    let trees = graphs.len();
    graphs.extend(corpus(100, 4..=12, 11));
    for (i, g) in graphs.iter().enumerate() {
        for k in 1..=3 {
            let (a, b) = (gamma_bk(g, k).unwrap().value, gamma_bk_oracle(g, k).unwrap().value);
            if a != b {
                failures.push(format!("graph {i} ({:?}), k={k}: bnb {a}, oracle {b}", g.edges()));
            }
        }
    }
    let detail = format!("{trees} trees + 100 graphs, k=1..3");
    report(11, "branch-and-bound vs oracle", t, &failures, &detail);
}

/// Bit-packed AHU code: `(` is 1, `)` is 0. Child codes are primitive
/// balanced strings, hence prefix-free, so left-aligned comparison orders them.
fn packed_code(adj: &[Vec<usize>], v: usize, parent: usize) -> (u64, u32) {
    let mut kids: Vec<(u64, u32)> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| packed_code(adj, w, v))
        .collect();
    kids.sort_unstable_by_key(|&(bits, len)| bits << (64 - len));
    let (mut bits, mut len) = (1u64, 1u32);
    for (b, l) in kids {
        bits = bits << l | b;
        len += l;
    }
    (bits << 1, len + 1)
}

fn tree_key(n: usize, edges: &[(usize, usize)]) -> u64 {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    // peel leaves down to the centre(s)
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer
        .iter()
        .map(|&c| {
            let (bits, len) = packed_code(&adj, c, usize::MAX);
            bits << (64 - len)
        })
        .max()
        .unwrap()
}

/// Every labelled tree on `n` vertices via its Prüfer sequence, deduplicated by canonical key.
fn prufer_classes(n: usize) -> HashSet<u64> {
    let mut out = HashSet::new();
    if n <= 2 {
        let edges: Vec<(usize, usize)> = if n == 2 { vec![(0, 1)] } else { vec![] };
        out.insert(tree_key(n, &edges));
        return out;
    }
    let mut seq = vec![0usize; n - 2];
    let mut edges = Vec::with_capacity(n - 1);
    let mut degree = vec![0usize; n];
    loop {
        degree.iter_mut().for_each(|d| *d = 1);
        for &x in &seq {
            degree[x] += 1;
        }
        edges.clear();
        for &x in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf, x));
            degree[leaf] = 0;
            degree[x] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.insert(tree_key(n, &edges));
        // next sequence in base n
        let mut i = 0;
        while i < seq.len() && seq[i] == n - 1 {
            seq[i] = 0;
            i += 1;
        }
        if i == seq.len() {
            return out;
        }
        seq[i] += 1;
    }
}

fn c12_free_tree_counts() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    for n in 1..=10 {
        let trees: Vec<Graph> = enumerate_free_trees(n).unwrap().collect();
        let keys: HashSet<u64> = trees.iter().map(|t| tree_key(n, t.edges())).collect();
        let oracle = prufer_classes(n);
        if keys.len() != trees.len() || keys != oracle || trees.iter().any(|t| !t.is_tree()) {
            failures.push(format!("n={n}: {} emitted, {} distinct, oracle {}", trees.len(), keys.len(), oracle.len()));
        }
        counts.push(trees.len());
    }
    if counts[6] != 11 || counts[9] != 106 {
        failures.push(format!("counts {counts:?}"));
    }
    let detail = format!("counts n=1..10 {counts:?}");
    report(12, "free-tree enumeration vs Prüfer oracle", t, &failures, &detail);
}
