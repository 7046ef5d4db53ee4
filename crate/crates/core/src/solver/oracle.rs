use std::time::Instant;

use crate::graph::{DistanceMatrix, Graph};
use crate::solver::{BroadcastFunction, Method, SolveError, SolveResult, SolveStats};
use crate::{Cost, Power, Vertex};

/// Size guards for the exhaustive oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_cost: Cost,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_vertices: 16,
            max_cost: 8,
        }
    }
}

/// Exhaustive γ_Bk by iterative deepening on the cost.
///
/// For `c = 1, 2, ...` every support set (ascending vertex lists, in
/// lexicographic order) and every power vector on it summing to `c` (again
/// lexicographic) is tried; the first dominating one is returned. The
/// witness is therefore the lexicographically least optimal broadcast.
pub fn gamma_bk_oracle(g: &Graph, k: Power) -> Result<SolveResult, SolveError> {
    gamma_bk_oracle_with(g, k, &OracleLimits::default())
}

pub fn gamma_bk_oracle_with(
    g: &Graph,
    k: Power,
    limits: &OracleLimits,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    if k == 0 {
        return Err(SolveError::ZeroCap);
    }
    g.require_connected()?;
    if g.order() > limits.max_vertices {
        return Err(SolveError::OracleTooLarge {
            n: g.order(),
            limit: limits.max_vertices,
        });
    }
    // a power above the diameter reaches nothing new
    let diameter = g.metrics()?.diameter;
    let cap = k.min(diameter.max(1));
    let mut search = Enumeration {
        n: g.order(),
        cap,
        dist: g.distances(),
        support: Vec::new(),
        powers: Vec::new(),
        checked: 0,
    };
    for cost in 1..=limits.max_cost {
        if search.supports(0, cost) {
            let pairs: Vec<(Vertex, Power)> = search
                .support
                .iter()
                .copied()
                .zip(search.powers.iter().copied())
                .collect();
            return Ok(SolveResult {
                value: cost,
                witness: BroadcastFunction::from_assignments(g.order(), k, &pairs)?,
                stats: SolveStats {
                    nodes: search.checked,
                    method: Method::Oracle,
                    elapsed: started.elapsed(),
                },
            });
        }
    }
    Err(SolveError::OracleCostLimit {
        limit: limits.max_cost,
    })
}

struct Enumeration<'a> {
    n: usize,
    cap: Power,
    dist: &'a DistanceMatrix,
    support: Vec<Vertex>,
    powers: Vec<Power>,
    checked: u64,
}

impl Enumeration<'_> {
    /// Visits the current support, then its extensions by larger vertices.
    /// Leaves the successful assignment in `support`/`powers`.
    fn supports(&mut self, from: Vertex, cost: Cost) -> bool {
        if !self.support.is_empty() && self.powers_for(cost) {
            return true;
        }
        if self.support.len() as Cost == cost {
            return false;
        }
        for v in from..self.n {
            self.support.push(v);
            if self.supports(v + 1, cost) {
                return true;
            }
            self.support.pop();
        }
        false
    }

    fn powers_for(&mut self, cost: Cost) -> bool {
        self.powers.clear();
        self.assign(cost)
    }

    fn assign(&mut self, remaining: Cost) -> bool {
        let i = self.powers.len();
        let slots_after = (self.support.len() - i - 1) as Cost;
        if slots_after == 0 {
            if remaining == 0 || remaining > self.cap {
                return false;
            }
            self.powers.push(remaining);
            self.checked += 1;
            if self.dominates() {
                return true;
            }
            self.powers.pop();
            return false;
        }
        // every later slot needs at least 1
        let hi = remaining.saturating_sub(slots_after).min(self.cap);
        for p in 1..=hi {
            self.powers.push(p);
            if self.assign(remaining - p) {
                return true;
            }
            self.powers.pop();
        }
        false
    }

    fn dominates(&self) -> bool {
        (0..self.n).all(|u| {
            self.support
                .iter()
                .zip(&self.powers)
                .any(|(&v, &p)| self.dist.within(u, v, p))
        })
    }
}
