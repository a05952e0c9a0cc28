use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{brute_force_model, generate_random_3sat, generate_two_occurrence, GeneratorConfig};
use super::stats::{log_log_slope, median, wilson_interval, Z95};
use super::ExperimentError;
use crate::cluster::clusterize;
use crate::formula::CnfFormula;
use crate::rng::derive_seed;
use crate::solver::{clustered_sparrow, schoening_walk, SparrowParams};

pub const SUCCESS_RATE_SCHEMA: &str = "success-rate v1";
pub const PROP3_SCHEMA: &str = "prop3-scaling v1";
pub const BASELINE_SCHEMA: &str = "baseline v1";

/// Largest source formula screened by exhaustive search when not planted.
pub const MAX_SCREENED_VARS: usize = 24;

// Stream labels under the master seed.
const INSTANCE_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub m: usize,
    pub n_star: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Failed trials count as the full budget.
    pub median_steps: f64,
    pub budget: u64,
}

/// Writes `# schema: <schema>` followed by a header row and one row per item.
pub fn write_csv<W: Write, T: Serialize>(mut out: W, schema: &str, rows: &[T]) -> Result<(), ExperimentError> {
    writeln!(out, "# schema: {schema}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn instance_for(
    n: usize,
    c: usize,
    planted: bool,
    seed: u64,
    idx: usize,
) -> Result<CnfFormula, ExperimentError> {
    let cfg = GeneratorConfig { n, c, planted, seed: derive_seed(seed, &[INSTANCE_STREAM, idx as u64]) };
    let inst = generate_random_3sat(&cfg)?;
    if !planted {
        if n > MAX_SCREENED_VARS {
            return Err(ExperimentError::InvalidConfig(format!(
                "unplanted instances are screened exhaustively and need n <= {MAX_SCREENED_VARS}"
            )));
        }
        if brute_force_model(&inst.formula).is_none() {
            return Err(ExperimentError::UnsatInstance { n, c });
        }
    }
    Ok(inst.formula)
}

/// Success rate of the clustered search within its budget.
///
/// One instance per size, drawn from `params.seed`; trial `t` of size `i`
/// runs with seed `derive_seed(params.seed, [1, i, t])`. The trial seed does
/// not depend on the budget, so raising `budget_multiplier` extends the same
/// trajectories and can only raise the success count.
pub fn success_rate_experiment(
    sizes: &[(usize, usize)],
    trials: u64,
    params: &SparrowParams,
    planted: bool,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    params.validate()?;
    sizes
        .iter()
        .enumerate()
        .map(|(i, &(n, c))| {
            let source = instance_for(n, c, planted, params.seed, i)?;
            let (clustered, _) = clusterize(&source);
            let budget = params.budget(clustered.num_clauses());
            let runs: Vec<(bool, u64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let p = SparrowParams { record: false, ..params.with_seed(derive_seed(params.seed, &[TRIAL_STREAM, i as u64, t])) };
                    let r = clustered_sparrow(&clustered, &p).expect("params validated");
                    (r.is_solved(), r.steps_used)
                })
                .collect();
            let successes = runs.iter().filter(|r| r.0).count() as u64;
            let steps: Vec<u64> = runs.iter().map(|r| if r.0 { r.1 } else { budget }).collect();
            let (wilson_low, wilson_high) = wilson_interval(successes, trials, Z95);
            Ok(ExperimentRow {
                m: clustered.num_clauses(),
                n_star: clustered.num_vars(),
                trials,
                successes,
                success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
                wilson_low,
                wilson_high,
                median_steps: median(&steps),
                budget,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Row {
    pub m: usize,
    pub n_star: usize,
    pub source_clauses: usize,
    pub trials: u64,
    pub successes: u64,
    pub median_steps: f64,
    pub max_steps: u64,
    pub negative_flips: u64,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Report {
    pub rows: Vec<Prop3Row>,
    /// Least-squares slope of ln(median_steps) against ln(m); needs two sizes.
    pub slope: Option<f64>,
    pub total_negative_flips: u64,
}

/// Source clause count whose clustered two-occurrence formula has about
/// `m` clauses.
pub fn two_occurrence_clauses_for(m: usize) -> usize {
    ((m as f64 / 4.0).round() as usize).max(2)
}

/// `(m, n_star, solved, steps, negative_flips, budget)` of one run.
type Prop3Run = (usize, usize, bool, u64, u64, u64);

/// Scaling of the clustered search on formulas where every variable occurs
/// at most twice. Each trial draws its own instance; rows report the actual
/// clustered clause count.
pub fn prop3_scaling_experiment(m_values: &[usize], trials: u64, seed: u64) -> Result<Prop3Report, ExperimentError> {
    let rows = m_values
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let c = two_occurrence_clauses_for(target);
            let runs: Vec<Result<Prop3Run, ExperimentError>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let inst = generate_two_occurrence(c, derive_seed(seed, &[INSTANCE_STREAM, i as u64, t]))?;
                    let (clustered, _) = clusterize(&inst.formula);
                    let params = SparrowParams {
                        record: true,
                        ..SparrowParams::default().with_seed(derive_seed(seed, &[TRIAL_STREAM, i as u64, t]))
                    };
                    let r = clustered_sparrow(&clustered, &params)?;
                    Ok((
                        clustered.num_clauses(),
                        clustered.num_vars(),
                        r.is_solved(),
                        r.steps_used,
                        r.negative_flips() as u64,
                        r.budget,
                    ))
                })
                .collect();
            let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
            // m depends only on c, so every trial agrees
            let (m, n_star) = runs.first().map_or((0, 0), |r| (r.0, r.1));
            let steps: Vec<u64> = runs.iter().map(|r| r.3).collect();
            Ok(Prop3Row {
                m,
                n_star,
                source_clauses: c,
                trials,
                successes: runs.iter().filter(|r| r.2).count() as u64,
                median_steps: median(&steps),
                max_steps: steps.iter().copied().max().unwrap_or(0),
                negative_flips: runs.iter().map(|r| r.4).sum(),
                budget: runs.first().map_or(0, |r| r.5),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.m as f64, r.median_steps.max(1.0))).unzip();
    let slope = (rows.len() >= 2).then(|| log_log_slope(&xs, &ys));
    let total_negative_flips = rows.iter().map(|r| r.negative_flips).sum();
    Ok(Prop3Report { rows, slope, total_negative_flips })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub algorithm: String,
    pub n: usize,
    pub c: usize,
    /// Clause count of the formula the algorithm ran on.
    pub m: usize,
    pub num_vars: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Flips to solution; failures count as all flips spent.
    pub median_flips: f64,
    /// Independent tries: one per clustered run, one per Schöning restart.
    pub attempts: u64,
    pub per_attempt_success: f64,
}

fn baseline_row(
    algorithm: &str,
    (n, c): (usize, usize),
    f: &CnfFormula,
    runs: &[(bool, u64, u64)],
) -> BaselineRow {
    let trials = runs.len() as u64;
    let successes = runs.iter().filter(|r| r.0).count() as u64;
    let attempts: u64 = runs.iter().map(|r| r.2).sum();
    let flips: Vec<u64> = runs.iter().map(|r| r.1).collect();
    let (wilson_low, wilson_high) = wilson_interval(successes, trials, Z95);
    BaselineRow {
        algorithm: algorithm.to_string(),
        n,
        c,
        m: f.num_clauses(),
        num_vars: f.num_vars(),
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        wilson_low,
        wilson_high,
        median_flips: median(&flips),
        attempts,
        per_attempt_success: if attempts == 0 { 0.0 } else { successes as f64 / attempts as f64 },
    }
}

/// Runs the clustered search and Schöning's walk (at most `restarts` tries)
/// on the same planted instance per size, with the same per-trial seeds.
pub fn baseline_comparison(
    sizes: &[(usize, usize)],
    trials: u64,
    seed: u64,
    restarts: u64,
    params: &SparrowParams,
) -> Result<Vec<BaselineRow>, ExperimentError> {
    params.validate()?;
    let mut rows = Vec::with_capacity(2 * sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let source = instance_for(size.0, size.1, true, seed, i)?;
        let (clustered, _) = clusterize(&source);
        let trial_seed = |t: u64| derive_seed(seed, &[TRIAL_STREAM, i as u64, t]);
        let sparrow: Vec<(bool, u64, u64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let p = SparrowParams { record: false, ..params.with_seed(trial_seed(t)) };
                let r = clustered_sparrow(&clustered, &p).expect("params validated");
                (r.is_solved(), r.steps_used, 1)
            })
            .collect();
        let schoening: Vec<(bool, u64, u64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let r = schoening_walk(&source, restarts, trial_seed(t));
                (r.is_solved(), r.steps_used, r.restarts_used)
            })
            .collect();
        rows.push(baseline_row("sparrow", size, &clustered, &sparrow));
        rows.push(baseline_row("schoening", size, &source, &schoening));
    }
    Ok(rows)
}
