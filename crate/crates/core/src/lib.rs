//! Clustered Sparrow: a make/break local search for 3-SAT that runs on an
//! occurrence-bounded rewrite of the input, together with the tools to study
//! it as a Markov chain.
//!
//! * [`formula`] and [`dimacs`]: CNF data model and file format.
//! * [`cluster`]: the rewrite that bounds each variable to three clauses.
//! * [`flip`]: make/break accounting and flip classification.
//! * [`solver`]: the clustered Sparrow search and the Schöning walk.
//! * [`markov`]: exact chains over assignments, lumping and limit theorems.
//! * [`experiment`]: instance generators and benchmark drivers.

pub mod cluster;
pub mod dimacs;
pub mod experiment;
pub mod flip;
pub mod formula;
pub mod markov;
pub mod rng;
pub mod solver;

pub use cluster::{clusterize, recover_assignment, verify_cluster_shape, ClusterShapeReport, VarMap};
pub use dimacs::{emit_dimacs, parse_dimacs, DimacsError};
pub use flip::{
    candidate_variables, classify_flip, classify_state, flip_table, make_break, FlipClass, FlipDelta, FlipTable,
    StateClassification, StateKind,
};
pub use formula::{Assignment, Clause, CnfFormula, Evaluation, FormulaError, Literal};
pub use solver::{
    clustered_sparrow, schoening_walk, select_flip, solve_end_to_end, RunResult, RunStatus, SparrowParams,
};
