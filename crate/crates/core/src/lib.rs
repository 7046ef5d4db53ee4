//! Exact computation of the dominating k-broadcast number γ_Bk.
//!
//! A dominating k-broadcast on a graph assigns each vertex a power in
//! `0..=k` so that every vertex lies within distance `f(v)` of some `v` with
//! `f(v) >= 1`; γ_Bk is the least total power. The crate provides:
//!
//! * [`graph`]: simple graphs, distances, radius/diameter, bridges and twin leaves;
//! * [`solver`]: broadcast semantics plus an exhaustive oracle and a branch-and-bound solver;
//! * [`tree_tools`]: tree generators, twin-free reduction and free-tree enumeration;
//! * [`spanning`]: spanning-tree enumeration and broadcast-preserving spanning trees;
//! * [`bounds`]: exact upper-bound formulas and audits over tree and graph corpora;
//! * [`sat_reduction`]: the 3-SAT to dominating k-broadcast reduction.

pub(crate) mod bitset;
pub mod graph;
pub mod bounds;
pub mod solver;
pub mod sat_reduction;
pub mod spanning;
pub mod tree_tools;

/// Vertex identifier, dense in `0..n`.
pub type Vertex = usize;
/// Transmission power of a single vertex.
pub type Power = u32;
/// Total cost of a broadcast.
pub type Cost = u32;

pub use bounds::{upper_bound, BoundReport};
pub use graph::{DistanceMatrix, Graph, GraphError, Metrics, Structure};
pub use sat_reduction::{reduce, CnfFormula, ReductionInstance};
pub use spanning::{extract_broadcast_tree, min_over_spanning_trees};
pub use tree_tools::{enumerate_free_trees, gen_family, TreeFamilySpec};
pub use solver::{
    gamma_bk, gamma_bk_oracle, is_dominating, BroadcastFunction, SolveError, SolveResult,
    SolverConfig, Witness,
};
