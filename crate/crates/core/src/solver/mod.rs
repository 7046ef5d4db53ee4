//! Dominating k-broadcasts: their semantics, and two exact solvers for the
//! minimum cost γ_Bk.
//!
//! [`gamma_bk_oracle`] is a deliberately naive iterative-deepening
//! enumeration kept as a reference; [`gamma_bk`] is the branch-and-bound
//! solver used everywhere else. Both are exact.

mod bnb;
mod oracle;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::{Cost, Power, Vertex};

pub use bnb::{gamma_bk, gamma_bk_below, gamma_bk_with, SolverConfig};
pub use oracle::{gamma_bk_oracle, gamma_bk_oracle_with, OracleLimits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("power cap k must be at least 1")]
    ZeroCap,
    #[error("broadcast is defined on {found} vertices but the graph has {expected}")]
    DomainMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} has power {power} above the cap {k}")]
    PowerAboveCap { vertex: Vertex, power: Power, k: Power },
    #[error("broadcast is not dominating (vertex {0} is not reached)")]
    NotDominating(Vertex),
    #[error("broadcast of cost {cost} is not optimal (optimum is {optimum})")]
    NotOptimal { cost: Cost, optimum: Cost },
    #[error("oracle refuses graphs with more than {limit} vertices (got {n})")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("oracle gave up: no dominating broadcast of cost <= {limit}")]
    OracleCostLimit { limit: Cost },
    #[error("witness records value {recorded} but its powers sum to {actual}")]
    WitnessValue { recorded: Cost, actual: Cost },
    #[error("search guard hit after {nodes} nodes; best known upper bound {upper}, lower bound {lower}")]
    Guard { nodes: u64, upper: Cost, lower: Cost },
}

/// A broadcast `f: V -> {0, ..., k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BroadcastFunction {
    k: Power,
    values: Vec<Power>,
}

impl BroadcastFunction {
    pub fn new(k: Power, values: Vec<Power>) -> Result<Self, SolveError> {
        if k == 0 {
            return Err(SolveError::ZeroCap);
        }
        if let Some((vertex, &power)) = values.iter().enumerate().find(|(_, &p)| p > k) {
            return Err(SolveError::PowerAboveCap { vertex, power, k });
        }
        Ok(Self { k, values })
    }

    /// The all-zero broadcast on `n` vertices.
    pub fn zero(n: usize, k: Power) -> Result<Self, SolveError> {
        Self::new(k, vec![0; n])
    }

    /// Builds a broadcast from `(vertex, power)` pairs; unlisted vertices get 0.
    pub fn from_assignments(
        n: usize,
        k: Power,
        assignments: &[(Vertex, Power)],
    ) -> Result<Self, SolveError> {
        let mut values = vec![0; n];
        for &(v, p) in assignments {
            if v >= n {
                return Err(SolveError::DomainMismatch {
                    expected: n,
                    found: v + 1,
                });
            }
            values[v] = p;
        }
        Self::new(k, values)
    }

    pub fn k(&self) -> Power {
        self.k
    }

    pub fn values(&self) -> &[Power] {
        &self.values
    }

    pub fn power(&self, v: Vertex) -> Power {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// ω(f), the sum of all powers.
    pub fn cost(&self) -> Cost {
        self.values.iter().sum()
    }

    /// V⁺: vertices with positive power, ascending.
    pub fn broadcasters(&self) -> Vec<Vertex> {
        (0..self.values.len()).filter(|&v| self.values[v] > 0).collect()
    }

    /// V⁰: vertices with power zero, ascending.
    pub fn idle(&self) -> Vec<Vertex> {
        (0..self.values.len()).filter(|&v| self.values[v] == 0).collect()
    }

    /// Positive-power vertices with their powers, ascending by vertex.
    pub fn assignments(&self) -> Vec<(Vertex, Power)> {
        self.broadcasters()
            .into_iter()
            .map(|v| (v, self.values[v]))
            .collect()
    }

    pub(crate) fn with_power(&self, v: Vertex, p: Power) -> Self {
        let mut out = self.clone();
        out.values[v] = p;
        out
    }

    pub fn to_witness(&self) -> Witness {
        Witness {
            k: self.k,
            value: self.cost(),
            assignments: self
                .assignments()
                .into_iter()
                .map(|(vertex, power)| Assignment { vertex, power })
                .collect(),
        }
    }
}

/// Serialized form of a broadcast: only positive powers, sorted by vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub k: Power,
    pub value: Cost,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub vertex: Vertex,
    pub power: Power,
}

impl Witness {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rebuilds the broadcast on a graph of order `n`, checking the recorded value.
    pub fn to_broadcast(&self, n: usize) -> Result<BroadcastFunction, SolveError> {
        let pairs: Vec<_> = self.assignments.iter().map(|a| (a.vertex, a.power)).collect();
        let f = BroadcastFunction::from_assignments(n, self.k, &pairs)?;
        if f.cost() != self.value {
            return Err(SolveError::WitnessValue {
                recorded: self.value,
                actual: f.cost(),
            });
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Bnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub method: Method,
    pub elapsed: Duration,
}

/// An optimal dominating k-broadcast together with its cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Cost,
    pub witness: BroadcastFunction,
    pub stats: SolveStats,
}

fn check_domain(g: &Graph, f: &BroadcastFunction) -> Result<(), SolveError> {
    if f.len() != g.order() {
        return Err(SolveError::DomainMismatch {
            expected: g.order(),
            found: f.len(),
        });
    }
    Ok(())
}

/// For every vertex, how many broadcasters reach it.
pub fn coverage_counts(g: &Graph, f: &BroadcastFunction) -> Result<Vec<u32>, SolveError> {
    check_domain(g, f)?;
    let dist = g.distances();
    let senders = f.assignments();
    Ok((0..g.order())
        .map(|u| {
            senders
                .iter()
                .filter(|&&(v, p)| dist.within(u, v, p))
                .count() as u32
        })
        .collect())
}

/// First vertex not reached by any broadcaster, if any.
pub fn first_undominated(g: &Graph, f: &BroadcastFunction) -> Result<Option<Vertex>, SolveError> {
    Ok(coverage_counts(g, f)?.iter().position(|&c| c == 0))
}

/// `true` iff every vertex `u` has a broadcaster `v` with `d(u, v) <= f(v)`.
///
/// Works on disconnected graphs too: unreachable pairs never dominate each other.
pub fn is_dominating(g: &Graph, f: &BroadcastFunction) -> Result<bool, SolveError> {
    Ok(first_undominated(g, f)?.is_none())
}

/// `true` iff every vertex is reached by exactly one broadcaster.
pub fn efficiency_check(g: &Graph, f: &BroadcastFunction) -> Result<bool, SolveError> {
    let counts = coverage_counts(g, f)?;
    if let Some(v) = counts.iter().position(|&c| c == 0) {
        return Err(SolveError::NotDominating(v));
    }
    Ok(counts.iter().all(|&c| c == 1))
}

/// γ_Bk for `k = 1..=rad(g)`. The last entry is γ_B(g), the first is γ(g).
pub fn gamma_chain(g: &Graph) -> Result<Vec<Cost>, SolveError> {
    let radius = g.radius()?;
    (1..=radius)
        .map(|k| gamma_bk(g, k).map(|r| r.value))
        .collect()
}

/// Turns an optimal broadcast into one of equal cost that is zero on every
/// leaf, by moving each positive leaf value onto its support vertex.
///
/// When the support vertex is itself a leaf (the graph is `P_2`) the value
/// stays put: one of the two leaves is then zero.
pub fn normalize_leaf_zero(
    g: &Graph,
    f: &BroadcastFunction,
) -> Result<BroadcastFunction, SolveError> {
    if let Some(v) = first_undominated(g, f)? {
        return Err(SolveError::NotDominating(v));
    }
    let optimum = gamma_bk(g, f.k())?.value;
    if f.cost() != optimum {
        return Err(SolveError::NotOptimal {
            cost: f.cost(),
            optimum,
        });
    }
    let mut out = f.clone();
    for leaf in (0..g.order()).filter(|&v| g.degree(v) == 1) {
        let support = g.neighbors(leaf)[0];
        if out.power(leaf) == 0 || g.degree(support) == 1 {
            continue;
        }
        if out.power(support) != 0 {
            // an optimal broadcast never powers both a leaf and its support
            return Err(SolveError::NotOptimal {
                cost: f.cost(),
                optimum,
            });
        }
        out = out
            .with_power(support, out.power(leaf))
            .with_power(leaf, 0);
    }
    debug_assert!(is_dominating(g, &out).unwrap());
    Ok(out)
}
