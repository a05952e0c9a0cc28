//! Exact Markov-chain analysis of the search on small formulas.
//!
//! The search on a formula with `N` variables is a chain over the `2^N`
//! assignments; state `s` is the assignment whose variable `i` equals bit `i`
//! of `s`. [`build_chain`] writes that chain down exactly, optionally mixed
//! with a uniform random jump of probability `epsilon` to make it ergodic.
//! The rest of the module works on the result: stationary distribution,
//! two-state lumping over positive/non-positive states, fundamental-matrix
//! variances, per-class payoffs, and Monte-Carlo checks of the ergodic theorem
//! and the central limit theorem.

use thiserror::Error;

mod birth_death;
mod chain;
mod payoff;
mod report;
mod simulate;
mod two_state;

pub use birth_death::birth_death_hit_times;
pub use chain::{
    build_chain, clt_variances, fundamental_matrix, partition_states, stationary, ChainLimits, StatePartition,
    StationaryDist, StationaryOptions, TransitionMatrix,
};
pub use payoff::{measure_class_payoffs, state_expected_delta, PayoffEstimate, PayoffWitness};
pub use report::{analyze, AnalysisReport, BoundCheck};
pub use simulate::{simulate_visits, visit_count_stats, VisitStats};
pub use two_state::{
    eq6_holds, expected_gain_bound, lump_two_state, sigma_sq_closed_form, sigma_sq_from_w1, two_state_quantities,
    Lumped2Chain, LumpedChain,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("{found} variables exceed the limit of {max}")]
    TooManyVariables { max: usize, found: usize },
    #[error("{found} states exceed the limit of {max}")]
    TooManyStates { max: usize, found: usize },
    #[error("chain is not irreducible; build it with epsilon > 0")]
    EpsilonRequired,
    #[error("power iteration stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("{0} class has zero stationary mass")]
    EmptyClass(&'static str),
    #[error("a = b = 0: the two-state chain never moves")]
    DegenerateChain,
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("matrix is singular")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
