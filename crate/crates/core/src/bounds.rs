//! Closed-form upper bounds on γ_Bk and exhaustive audits against them.
//!
//! The arithmetic is generic over primitive integers and never touches
//! floating point.

use std::fmt::Write as _;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{PrimInt, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::solver::{gamma_bk_with, SolveError, SolverConfig};
use crate::tree_tools::{canonical_tree_code, enumerate_free_trees, TreeError};
use crate::{Cost, Power};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("inconsistent arguments: {0}")]
    Arguments(&'static str),
    #[error("integer overflow while evaluating the bound")]
    Overflow,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Upper bound on γ_Bk for a connected graph of order `n` and radius `r`:
///
/// * `⌊n/2⌋` when `k = 1` (and `r >= 1`);
/// * `⌈(k+2)n / (3(k+1))⌉` when `1 < k < r`;
/// * `⌈n/3⌉` when `k >= r`.
///
/// The single-vertex graph (`r = 0`) falls in the last case.
pub fn upper_bound<T: PrimInt + Integer>(n: T, k: T, r: T) -> Result<T, BoundError> {
    let (zero, one) = (T::zero(), T::one());
    let two = one + one;
    let three = two + one;
    if n < one {
        return Err(BoundError::Arguments("order must be at least 1"));
    }
    if k < one {
        return Err(BoundError::Arguments("k must be at least 1"));
    }
    if r < zero || r > n {
        return Err(BoundError::Arguments("radius must lie in 0..=n"));
    }
    if (r == zero) != (n == one) {
        return Err(BoundError::Arguments("radius 0 exactly for the single vertex"));
    }
    if k == one && r >= one {
        return Ok(n.div_floor(&two));
    }
    if k >= r {
        return Ok(n.div_ceil(&three));
    }
    let num = (k + two).checked_mul(&n).ok_or(BoundError::Overflow)?;
    let den = (k + one).checked_mul(&three).ok_or(BoundError::Overflow)?;
    Ok(num.div_ceil(&den))
}

/// Evaluates `a + ⌈c(n-b)/d⌉ <= ⌈cn/d⌉` exactly. Requires `b, d > 0` and `a/b <= c/d`.
pub fn ceiling_lemma_holds<T: PrimInt + Integer + Signed>(
    a: T,
    b: T,
    c: T,
    d: T,
    n: T,
) -> Result<bool, BoundError> {
    if b <= T::zero() || d <= T::zero() {
        return Err(BoundError::Arguments("b and d must be positive"));
    }
    let ad = a.checked_mul(&d).ok_or(BoundError::Overflow)?;
    let cb = c.checked_mul(&b).ok_or(BoundError::Overflow)?;
    if ad > cb {
        return Err(BoundError::Arguments("a/b must not exceed c/d"));
    }
    let n_minus_b = n.checked_sub(&b).ok_or(BoundError::Overflow)?;
    let left = c
        .checked_mul(&n_minus_b)
        .ok_or(BoundError::Overflow)?
        .div_ceil(&d);
    let left = a.checked_add(&left).ok_or(BoundError::Overflow)?;
    let right = c.checked_mul(&n).ok_or(BoundError::Overflow)?.div_ceil(&d);
    Ok(left <= right)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    /// Canonical key: the centre-rooted AHU code for trees, the caller's name otherwise.
    pub instance: String,
    pub n: usize,
    pub radius: u32,
    pub k: Power,
    pub gamma: Cost,
    pub bound: u64,
    pub holds: bool,
    pub tight: bool,
    /// Edge list, kept for tight instances only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub instances: usize,
    pub violations: usize,
    /// Largest `γ_Bk / bound`, as a reduced fraction.
    pub max_ratio: Option<String>,
    pub tight: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub summary: BoundSummary,
}

impl BoundReport {
    fn from_rows(mut rows: Vec<BoundRow>) -> Self {
        rows.sort_by(|a, b| (a.n, a.k, &a.instance).cmp(&(b.n, b.k, &b.instance)));
        let max_ratio = rows
            .iter()
            .filter(|r| r.bound > 0)
            .map(|r| Ratio::new(r.gamma as u64, r.bound))
            .max()
            .map(|q| q.to_string());
        let summary = BoundSummary {
            instances: rows.len(),
            violations: rows.iter().filter(|r| !r.holds).count(),
            max_ratio,
            tight: rows
                .iter()
                .filter(|r| r.tight)
                .map(|r| r.instance.clone())
                .collect(),
        };
        BoundReport { rows, summary }
    }

    /// One JSON object per row, then `{"summary": ...}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("serializable"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>3} {:>3} {:>3} {:>5} {:>5}  {:<5} instance", "n", "rad", "k", "gamma", "bound", "");
        for r in &self.rows {
            let flag = match (r.holds, r.tight) {
                (false, _) => "FAIL",
                (true, true) => "tight",
                (true, false) => "",
            };
            let _ = writeln!(
                out,
                "{:>3} {:>3} {:>3} {:>5} {:>5}  {:<5} {}",
                r.n, r.radius, r.k, r.gamma, r.bound, flag, r.instance
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} instances, {} violations, {} tight, max ratio {}",
            s.instances,
            s.violations,
            s.tight.len(),
            s.max_ratio.as_deref().unwrap_or("-")
        );
        out
    }
}

fn pool(config: &SolverConfig) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .expect("thread pool")
}

fn row(instance: String, g: &Graph, k: Power, config: &SolverConfig) -> Result<BoundRow, BoundError> {
    let radius = g.radius().map_err(SolveError::from)?;
    let n = g.order();
    let gamma = gamma_bk_with(g, k, config)?.value;
    let bound = upper_bound(n as u64, k as u64, radius as u64)?;
    let tight = gamma as u64 == bound;
    Ok(BoundRow {
        instance,
        n,
        radius,
        k,
        gamma,
        bound,
        holds: gamma as u64 <= bound,
        tight,
        edges: tight.then(|| g.edges().to_vec()),
    })
}

/// Checks `γ_Bk(T) <= ⌈(k+2)n / (3(k+1))⌉` on every tree with `n <= max_n`
/// and radius above `k`.
pub fn audit_tree_bound(
    max_n: usize,
    k: Power,
    config: &SolverConfig,
) -> Result<BoundReport, BoundError> {
    if k < 3 {
        return Err(BoundError::Arguments("the tree audit needs k >= 3"));
    }
    let solver = SolverConfig {
        workers: 1,
        ..config.clone()
    };
    let pool = pool(config);
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let trees: Vec<Graph> = enumerate_free_trees(n)?
            .filter(|t| t.radius().expect("trees are connected") > k)
            .collect();
        let batch: Result<Vec<BoundRow>, BoundError> = pool.install(|| {
            trees
                .par_iter()
                .map(|t| row(canonical_tree_code(t)?, t, k, &solver))
                .collect()
        });
        rows.extend(batch?);
    }
    Ok(BoundReport::from_rows(rows))
}

/// Checks [`upper_bound`] on named connected graphs, at a fixed `k` or, with
/// `k = None`, at `k = rad(G)` where γ_Bk is the broadcast number.
pub fn audit_graph_bound(
    instances: &[(String, Graph)],
    k: Option<Power>,
    config: &SolverConfig,
) -> Result<BoundReport, BoundError> {
    let solver = SolverConfig {
        workers: 1,
        ..config.clone()
    };
    let rows: Result<Vec<BoundRow>, BoundError> = pool(config).install(|| {
        instances
            .par_iter()
            .map(|(name, g)| {
                let k = match k {
                    Some(k) => k,
                    None => g.radius().map_err(SolveError::from)?.max(1),
                };
                row(name.clone(), g, k, &solver)
            })
            .collect()
    });
    Ok(BoundReport::from_rows(rows?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub radius: u32,
    /// γ_Bk for `k = 1..=max(rad, 1)`.
    pub chain: Vec<Cost>,
    pub monotone: bool,
    /// γ(G), solved directly at `k = 1`.
    pub domination_number: Cost,
    /// γ_B(G), solved with powers up to the diameter and no radius clamp.
    pub broadcast_number: Cost,
    /// First entry equals γ(G) and last entry equals γ_B(G).
    pub endpoints_ok: bool,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.endpoints_ok
    }
}

pub fn audit_chain(g: &Graph, config: &SolverConfig) -> Result<ChainReport, BoundError> {
    let metrics = g.metrics().map_err(SolveError::from)?;
    let top = metrics.radius.max(1);
    let chain = (1..=top)
        .map(|k| gamma_bk_with(g, k, config).map(|r| r.value))
        .collect::<Result<Vec<Cost>, SolveError>>()?;
    let monotone = chain.windows(2).all(|w| w[0] >= w[1]);
    let domination_number = gamma_bk_with(g, 1, config)?.value;
    let unclamped = SolverConfig {
        clamp_to_radius: false,
        ..config.clone()
    };
    let broadcast_number = gamma_bk_with(g, metrics.diameter.max(1), &unclamped)?.value;
    let endpoints_ok =
        chain[0] == domination_number && *chain.last().unwrap() == broadcast_number;
    Ok(ChainReport {
        radius: metrics.radius,
        chain,
        monotone,
        domination_number,
        broadcast_number,
        endpoints_ok,
    })
}
