//! Reduction from 3-SAT to the dominating k-broadcast problem.
//!
//! Every variable `u_i` gets a gadget `G_i`: the literal vertices `u_i`,
//! `u'_i` and `k` paths `x_{j,1} .. x_{j,k}` whose first vertex is adjacent
//! to both literal vertices and whose last vertex is a leaf. Every clause
//! gets a path `Ĉ_j .. C_j` on `k` vertices with `Ĉ_j` joined to the
//! vertices of its three literals. The formula is satisfiable exactly when
//! the graph has a dominating k-broadcast of cost at most `k·n`.
//!
//! Vertex ids: all gadgets first (`u_i`, `u'_i`, then `x_{1,1..k}`,
//! `x_{2,1..k}`, ...), then the clause paths, each starting at `Ĉ_j`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::solver::{first_undominated, gamma_bk_with, BroadcastFunction, SolveError, SolverConfig};
use crate::{Cost, Power, Vertex};

/// Formulas with more variables are not brute-forced.
pub const MAX_BRUTE_FORCE_VARIABLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header announces {expected} clauses but {found} were given")]
    ClauseCount { expected: usize, found: usize },
    #[error("literal {literal} refers to a variable outside 1..={vars}")]
    LiteralOutOfRange { literal: i64, vars: usize },
    #[error("clause {clause} has {len} literals; 3-SAT clauses need exactly 3")]
    NotThreeLiterals { clause: usize, len: usize },
    #[error("clause {clause} repeats literal {literal}")]
    DuplicateLiteral { clause: usize, literal: i32 },
    #[error("the reduction needs k >= 3 (got {0})")]
    InvalidK(Power),
    #[error("assignment covers {found} variables, the formula has {expected}")]
    PartialAssignment { expected: usize, found: usize },
    #[error("broadcast cost {cost} exceeds the threshold k·n = {threshold}")]
    AboveThreshold { cost: Cost, threshold: Cost },
    #[error("gadget of variable {variable} spends {cost} instead of k = {k}")]
    GadgetBudget { variable: usize, cost: Cost, k: Power },
    #[error("gadget of variable {variable} leaves its leaf {leaf} undominated")]
    GadgetLeaf { variable: usize, leaf: Vertex },
    #[error("brute-force satisfiability is limited to {MAX_BRUTE_FORCE_VARIABLES} variables (got {0})")]
    TooManyVariables(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A 3-CNF formula over variables `1..=num_vars`, literals in DIMACS sign convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, SatError> {
        let mut checked = Vec::with_capacity(clauses.len());
        for (index, clause) in clauses.into_iter().enumerate() {
            for &lit in &clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(SatError::LiteralOutOfRange {
                        literal: lit as i64,
                        vars: num_vars,
                    });
                }
            }
            for (a, &lit) in clause.iter().enumerate() {
                if clause[..a].contains(&lit) {
                    return Err(SatError::DuplicateLiteral {
                        clause: index + 1,
                        literal: lit,
                    });
                }
            }
            let triple: [i32; 3] = clause.as_slice().try_into().map_err(|_| {
                SatError::NotThreeLiterals {
                    clause: index + 1,
                    len: clause.len(),
                }
            })?;
            checked.push(triple);
        }
        Ok(Self {
            num_vars,
            clauses: checked,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> Result<bool, SatError> {
        self.check_assignment(assignment)?;
        Ok(self.clauses.iter().all(|c| {
            c.iter()
                .any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0))
        }))
    }

    fn check_assignment(&self, assignment: &[bool]) -> Result<(), SatError> {
        if assignment.len() != self.num_vars {
            return Err(SatError::PartialAssignment {
                expected: self.num_vars,
                found: assignment.len(),
            });
        }
        Ok(())
    }

    /// First satisfying assignment in binary counting order (variable 1 is
    /// the lowest bit), by exhaustive search.
    pub fn brute_force_sat(&self) -> Result<Option<Vec<bool>>, SatError> {
        if self.num_vars > MAX_BRUTE_FORCE_VARIABLES {
            return Err(SatError::TooManyVariables(self.num_vars));
        }
        for mask in 0u32..1 << self.num_vars {
            let assignment: Vec<bool> = (0..self.num_vars).map(|i| mask >> i & 1 == 1).collect();
            if self.is_satisfied_by(&assignment)? {
                return Ok(Some(assignment));
            }
        }
        Ok(None)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for [a, b, c] in &self.clauses {
            out.push_str(&format!("{a} {b} {c} 0\n"));
        }
        out
    }
}

/// Parses DIMACS CNF: `c` comment lines, a `p cnf <vars> <clauses>` header,
/// and zero-terminated clauses that may span lines. A `%` line ends the input.
pub fn parse_dimacs_cnf(text: &str) -> Result<CnfFormula, SatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') {
            continue;
        }
        if content.starts_with('%') {
            break;
        }
        if content.starts_with('p') {
            if header.is_some() {
                return Err(SatError::Parse {
                    line,
                    msg: "second problem line".into(),
                });
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parsed = match fields[..] {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| SatError::Parse {
                line,
                msg: "expected `p cnf <variables> <clauses>`".into(),
            })?);
            continue;
        }
        if header.is_none() {
            return Err(SatError::Parse {
                line,
                msg: "clause before the `p cnf` header".into(),
            });
        }
        for tok in content.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| SatError::Parse {
                line,
                msg: format!("`{tok}` is not an integer literal"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let (vars, count) = header.ok_or(SatError::Parse {
        line: last_line,
        msg: "missing `p cnf` header".into(),
    })?;
    if !current.is_empty() {
        return Err(SatError::Parse {
            line: last_line,
            msg: "last clause is not terminated by 0".into(),
        });
    }
    if clauses.len() != count {
        return Err(SatError::ClauseCount {
            expected: count,
            found: clauses.len(),
        });
    }
    CnfFormula::new(vars, clauses)
}

/// What a vertex of G(C) stands for. Indices are 1-based as in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Positive(usize),
    Negative(usize),
    /// `x_{path,pos}` in the gadget of `var`.
    Gadget { var: usize, path: usize, pos: usize },
    ClauseHead(usize),
    /// Interior vertex `pos` (2..k-1) of a clause path.
    ClausePath { clause: usize, pos: usize },
    ClauseTail(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Role::Positive(i) => write!(f, "u_{i}"),
            Role::Negative(i) => write!(f, "u'_{i}"),
            Role::Gadget { var, path, pos } => write!(f, "x_{var}_{path}_{pos}"),
            Role::ClauseHead(j) => write!(f, "chat_{j}"),
            Role::ClausePath { clause, pos } => write!(f, "p_{clause}_{pos}"),
            Role::ClauseTail(j) => write!(f, "c_{j}"),
        }
    }
}

#[derive(Serialize)]
struct RoleEntry {
    vertex: Vertex,
    role: String,
}

#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub graph: Graph,
    pub k: Power,
    pub formula: CnfFormula,
    pub roles: Vec<Role>,
}

impl ReductionInstance {
    pub fn num_vars(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.formula.clauses().len()
    }

    /// `k·n`, the cost a satisfying assignment translates to.
    pub fn threshold(&self) -> Cost {
        self.k * self.num_vars() as Cost
    }

    fn gadget_size(&self) -> usize {
        gadget_size(self.k)
    }

    /// Vertex ids of the gadget of variable `var` (1-based).
    pub fn gadget(&self, var: usize) -> std::ops::Range<Vertex> {
        let base = (var - 1) * self.gadget_size();
        base..base + self.gadget_size()
    }

    pub fn positive(&self, var: usize) -> Vertex {
        self.gadget(var).start
    }

    pub fn negative(&self, var: usize) -> Vertex {
        self.gadget(var).start + 1
    }

    /// The `k` leaves `x_{j,k}` of a gadget.
    pub fn gadget_leaves(&self, var: usize) -> Vec<Vertex> {
        let k = self.k as usize;
        (1..=k).map(|j| self.gadget(var).start + 1 + j * k).collect()
    }

    pub fn literal_vertex(&self, literal: i32) -> Vertex {
        let var = literal.unsigned_abs() as usize;
        if literal > 0 {
            self.positive(var)
        } else {
            self.negative(var)
        }
    }

    /// Vertex ids of the path of clause `clause` (1-based), `Ĉ_j` first.
    pub fn clause_path(&self, clause: usize) -> std::ops::Range<Vertex> {
        let k = self.k as usize;
        let base = self.num_vars() * self.gadget_size() + (clause - 1) * k;
        base..base + k
    }

    /// `[{"vertex": id, "role": name}, ...]`
    pub fn role_map_json(&self) -> String {
        let entries: Vec<RoleEntry> = self
            .roles
            .iter()
            .enumerate()
            .map(|(vertex, role)| RoleEntry {
                vertex,
                role: role.to_string(),
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("serializable")
    }
}

fn gadget_size(k: Power) -> usize {
    let k = k as usize;
    k * k + 2
}

/// Builds G(C) for `k >= 3`.
pub fn reduce(formula: &CnfFormula, k: Power) -> Result<ReductionInstance, SatError> {
    if k < 3 {
        return Err(SatError::InvalidK(k));
    }
    let kk = k as usize;
    let n = formula.num_vars();
    let m = formula.clauses().len();
    let mut roles = Vec::with_capacity(n * gadget_size(k) + m * kk);
    let mut edges = Vec::new();
    for var in 1..=n {
        let base = roles.len();
        roles.push(Role::Positive(var));
        roles.push(Role::Negative(var));
        for path in 1..=kk {
            let first = roles.len();
            for pos in 1..=kk {
                roles.push(Role::Gadget { var, path, pos });
            }
            edges.push((base, first));
            edges.push((base + 1, first));
            edges.extend((first..first + kk - 1).map(|x| (x, x + 1)));
        }
    }
    for (index, clause) in formula.clauses().iter().enumerate() {
        let j = index + 1;
        let head = roles.len();
        roles.push(Role::ClauseHead(j));
        for pos in 2..kk {
            roles.push(Role::ClausePath { clause: j, pos });
        }
        roles.push(Role::ClauseTail(j));
        edges.extend((head..head + kk - 1).map(|x| (x, x + 1)));
        for &lit in clause {
            let var = lit.unsigned_abs() as usize;
            let literal = (var - 1) * gadget_size(k) + usize::from(lit < 0);
            edges.push((literal, head));
        }
    }
    let labels = roles.iter().map(Role::to_string).collect();
    let graph = Graph::new(roles.len(), edges)
        .expect("construction yields a simple graph")
        .with_labels(labels);
    Ok(ReductionInstance {
        graph,
        k,
        formula: formula.clone(),
        roles,
    })
}

/// Power `k` on the vertex of the true literal of every variable.
pub fn assignment_to_broadcast(
    inst: &ReductionInstance,
    assignment: &[bool],
) -> Result<BroadcastFunction, SatError> {
    inst.formula.check_assignment(assignment)?;
    let pairs: Vec<(Vertex, Power)> = assignment
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let v = if value { inst.positive(i + 1) } else { inst.negative(i + 1) };
            (v, inst.k)
        })
        .collect();
    Ok(BroadcastFunction::from_assignments(
        inst.graph.order(),
        inst.k,
        &pairs,
    )?)
}

/// Reads the assignment back: `u_i` is true iff `f(u_i) = k`.
///
/// Checks, in order: cost at most `k·n`; each gadget spends exactly `k`
/// and dominates its own leaves; `f` dominates the whole graph. Under these
/// conditions every clause end `C_j` can only be reached by a literal vertex
/// of power `k` adjacent to `Ĉ_j`, so the assignment satisfies the formula.
/// A gadget need not concentrate its budget on `u_i` or `u'_i`, though: the
/// literal vertices of an unused gadget may be reached through a clause
/// path from another gadget.
pub fn broadcast_to_assignment(
    inst: &ReductionInstance,
    f: &BroadcastFunction,
) -> Result<Vec<bool>, SatError> {
    if f.len() != inst.graph.order() {
        return Err(SolveError::DomainMismatch {
            expected: inst.graph.order(),
            found: f.len(),
        }
        .into());
    }
    if f.cost() > inst.threshold() {
        return Err(SatError::AboveThreshold {
            cost: f.cost(),
            threshold: inst.threshold(),
        });
    }
    let dist = inst.graph.distances();
    for var in 1..=inst.num_vars() {
        let gadget = inst.gadget(var);
        let cost: Cost = gadget.clone().map(|v| f.power(v)).sum();
        if cost != inst.k {
            return Err(SatError::GadgetBudget {
                variable: var,
                cost,
                k: inst.k,
            });
        }
        for leaf in inst.gadget_leaves(var) {
            if !gadget.clone().any(|v| f.power(v) > 0 && dist.within(leaf, v, f.power(v))) {
                return Err(SatError::GadgetLeaf { variable: var, leaf });
            }
        }
    }
    if let Some(v) = first_undominated(&inst.graph, f)? {
        return Err(SolveError::NotDominating(v).into());
    }
    Ok((1..=inst.num_vars())
        .map(|var| f.power(inst.positive(var)) == inst.k)
        .collect())
}

/// Exact γ_Bk of a possibly disconnected graph: the sum over components.
pub fn gamma_bk_components(
    g: &Graph,
    k: Power,
    config: &SolverConfig,
) -> Result<(Cost, BroadcastFunction), SolveError> {
    let mut values = vec![0; g.order()];
    let mut total = 0;
    for component in g.components() {
        let (sub, to_original) = g.induced_subgraph(&component);
        let r = gamma_bk_with(&sub, k, config)?;
        total += r.value;
        for (v, p) in r.witness.assignments() {
            values[to_original[v]] = p;
        }
    }
    Ok((total, BroadcastFunction::new(k, values)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionVerdict {
    pub vertices: usize,
    pub edges: usize,
    pub satisfiable: bool,
    pub gamma: Cost,
    pub threshold: Cost,
    /// `satisfiable == (gamma <= threshold)`
    pub equivalence_holds: bool,
    /// Assignment read back from the optimal broadcast when `gamma <= threshold`.
    pub extracted: Option<Vec<bool>>,
    pub extracted_satisfies: Option<bool>,
}

impl ReductionVerdict {
    pub fn holds(&self) -> bool {
        self.equivalence_holds && self.extracted_satisfies != Some(false)
    }
}

/// Brute-force SAT against exact γ_Bk(G(C)), plus the read-back of the optimal witness.
pub fn verify_reduction(
    formula: &CnfFormula,
    k: Power,
    config: &SolverConfig,
) -> Result<ReductionVerdict, SatError> {
    let inst = reduce(formula, k)?;
    let satisfiable = formula.brute_force_sat()?.is_some();
    let (gamma, witness) = gamma_bk_components(&inst.graph, k, config)?;
    let threshold = inst.threshold();
    let (extracted, extracted_satisfies) = if gamma <= threshold {
        let a = broadcast_to_assignment(&inst, &witness)?;
        let ok = formula.is_satisfied_by(&a)?;
        (Some(a), Some(ok))
    } else {
        (None, None)
    };
    Ok(ReductionVerdict {
        vertices: inst.graph.order(),
        edges: inst.graph.size(),
        satisfiable,
        gamma,
        threshold,
        equivalence_holds: satisfiable == (gamma <= threshold),
        extracted,
        extracted_satisfies,
    })
}
