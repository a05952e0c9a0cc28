//! Instance generators, benchmark drivers and claim checks.
//!
//! All drivers are deterministic in their seed: trial `t` of size `i` draws
//! from `derive_seed(seed, [stream, i, t])`, so results do not depend on how
//! rayon schedules the trials.

use thiserror::Error;

use crate::markov::MarkovError;
use crate::solver::SolverError;

mod bench;
mod claims;
mod generator;
mod stats;

pub use bench::{
    baseline_comparison, prop3_scaling_experiment, success_rate_experiment, two_occurrence_clauses_for, write_csv,
    BaselineRow, ExperimentRow, Prop3Report, Prop3Row, BASELINE_SCHEMA, MAX_SCREENED_VARS, PROP3_SCHEMA,
    SUCCESS_RATE_SCHEMA,
};
pub use claims::{
    claim_checks, compare_point, compare_range, exact_success_probability, run_class_estimates, ClaimConfig,
    ClaimReport, ExhaustiveClaim, Finding, Measured, NullAvailabilityCounterexample, NullAvailabilityReport,
    SampledClaim, SkippedInstance, null_availability_search, F1_RANGE, F2_RANGE, NULL_SEARCH_EXHAUSTIVE_VARS,
    SUCCESS_REFERENCE, W1_LOWER,
};
pub use generator::{brute_force_model, generate_random_3sat, generate_two_occurrence, GeneratedInstance, GeneratorConfig};
pub use stats::{log_log_slope, mean_interval, median, wilson_interval, MeanInterval, Z95};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("generated instance with n={n}, c={c} is unsatisfiable")]
    UnsatInstance { n: usize, c: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
