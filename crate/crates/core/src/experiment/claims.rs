//! Measured checks of the analytical claims made about the clustered search.
//!
//! Nothing here asserts a claim. Each check reports a measured value with an
//! interval next to the claimed value or range and classifies the outcome.
//! Exhaustive checks use exact chains on tiny clustered formulas, so their
//! intervals are points. Sampled checks run the search on larger planted
//! instances and use Wilson or normal intervals across runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{generate_random_3sat, generate_two_occurrence, GeneratorConfig};
use super::stats::{mean_interval, wilson_interval, MeanInterval, Z95};
use super::ExperimentError;
use crate::cluster::clusterize;
use crate::flip::{SearchState, StateKind};
use crate::formula::{Assignment, CnfFormula};
use crate::markov::{analyze, build_chain, partition_states, ChainLimits, MarkovError, TransitionMatrix};
use crate::rng::{derive_seed, random_assignment, rng_from_seed};
use crate::solver::{clustered_sparrow, select_flip, Move, RunResult, SparrowParams};

/// Success probability quoted for `m²` steps.
pub const SUCCESS_REFERENCE: f64 = 0.15;
pub const W1_LOWER: f64 = 0.2;
pub const F1_RANGE: (f64, f64) = (0.5, 1.0);
pub const F2_RANGE: (f64, f64) = (-0.25, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding {
    Agrees,
    Disagrees,
    Inconclusive,
}

/// Compares an interval with a claimed range.
pub fn compare_range(low: f64, high: f64, range: (f64, f64)) -> Finding {
    if low >= range.0 && high <= range.1 {
        Finding::Agrees
    } else if high < range.0 || low > range.1 {
        Finding::Disagrees
    } else {
        Finding::Inconclusive
    }
}

/// Compares an interval with a claimed point value.
pub fn compare_point(low: f64, high: f64, value: f64) -> Finding {
    if (low..=high).contains(&value) {
        Finding::Agrees
    } else {
        Finding::Disagrees
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub samples: usize,
    pub finding: Finding,
}

impl Measured {
    fn exact(value: f64, finding: Finding) -> Self {
        Measured { value, low: value, high: value, samples: 1, finding }
    }

    fn from_mean(mi: MeanInterval, range: (f64, f64)) -> Self {
        let finding = if mi.samples < 2 { Finding::Inconclusive } else { compare_range(mi.low, mi.high, range) };
        Measured { value: mi.mean, low: mi.low, high: mi.high, samples: mi.samples, finding }
    }

    /// Finite interval that contains the point estimate.
    pub fn is_valid(&self) -> bool {
        if self.samples == 0 {
            return false;
        }
        [self.value, self.low, self.high].iter().all(|x| x.is_finite())
            && self.low <= self.value + 1e-12
            && self.value <= self.high + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveClaim {
    pub label: String,
    pub source_vars: usize,
    pub source_clauses: usize,
    pub num_vars: usize,
    pub m: usize,
    pub satisfiable: bool,
    pub w1: Measured,
    pub f1: Measured,
    pub f2: Measured,
    pub payoff_state_violations: usize,
    pub e_per_step: f64,
    pub e_lower_bound: f64,
    /// Exact probability that a uniform start reaches a model within `m²` steps.
    pub success_m2: Measured,
    pub success_9m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedInstance {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledClaim {
    pub label: String,
    pub n: usize,
    pub c: usize,
    pub m: usize,
    pub n_star: usize,
    pub runs: u64,
    pub budget: u64,
    /// Success within `m²` steps, Wilson interval.
    pub success_m2: Measured,
    /// Per-run share of flips taken from positive states.
    pub w1: Measured,
    /// Per-run mean gain of flips from positive states.
    pub f1: Measured,
    /// Per-run mean gain of flips from non-positive states.
    pub f2: Measured,
}

/// A non-solved state whose candidates include neither a positive nor a null flip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullAvailabilityCounterexample {
    pub assignment: Vec<bool>,
    /// 1-based clause numbers.
    pub unsatisfied: Vec<usize>,
    /// 1-based candidate variables with their flip gains.
    pub deltas: Vec<(usize, i32)>,
}

/// Falsification search for the claim that a null flip is always available
/// in a non-positive state of a clustered formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullAvailabilityReport {
    pub label: String,
    pub exhaustive: bool,
    pub states_checked: u64,
    pub non_positive_states: u64,
    pub counterexamples_total: u64,
    /// The first few counterexamples.
    pub counterexamples: Vec<NullAvailabilityCounterexample>,
}

impl NullAvailabilityReport {
    fn observe(&mut self, state: &SearchState<'_>) {
        self.states_checked += 1;
        let sc = state.classify();
        if sc.kind != StateKind::NonPositive {
            return;
        }
        self.non_positive_states += 1;
        if sc.null.is_empty() {
            self.counterexamples_total += 1;
            if self.counterexamples.len() < MAX_LISTED_COUNTEREXAMPLES {
                self.counterexamples.push(NullAvailabilityCounterexample {
                    assignment: state.assignment().values().to_vec(),
                    unsatisfied: state.unsat_clauses().iter().map(|c| c + 1).collect(),
                    deltas: sc.deltas.iter().map(|&(v, d)| (v + 1, d.delta())).collect(),
                });
            }
        }
    }
}

const MAX_LISTED_COUNTEREXAMPLES: usize = 5;

/// Largest formula whose states are enumerated rather than sampled.
pub const NULL_SEARCH_EXHAUSTIVE_VARS: usize = 16;

/// Checks every state when `formula` has at most
/// [`NULL_SEARCH_EXHAUSTIVE_VARS`] variables. Otherwise follows the search
/// itself for `steps` moves from random restarts, checking each visited state.
pub fn null_availability_search(
    label: &str,
    formula: &CnfFormula,
    alpha: f64,
    steps: u64,
    seed: u64,
) -> NullAvailabilityReport {
    let n = formula.num_vars();
    let exhaustive = n <= NULL_SEARCH_EXHAUSTIVE_VARS;
    let mut report = NullAvailabilityReport {
        label: label.to_string(),
        exhaustive,
        states_checked: 0,
        non_positive_states: 0,
        counterexamples_total: 0,
        counterexamples: Vec::new(),
    };
    let mut state = SearchState::new(formula, Assignment::all_false(n)).expect("sized to formula");
    if exhaustive {
        for bits in 0..1u64 << n {
            state.reset(Assignment::from_bits(bits, n));
            report.observe(&state);
        }
        return report;
    }
    let mut rng = rng_from_seed(seed);
    state.reset(random_assignment(&mut rng, n));
    for _ in 0..steps {
        report.observe(&state);
        if state.is_model() {
            state.reset(random_assignment(&mut rng, n));
            continue;
        }
        let var = select_flip(&state.classify(), alpha, &mut rng).expect("non-model states have candidates");
        state.flip(var);
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub success_reference: f64,
    pub w1_lower: f64,
    pub f1_range: (f64, f64),
    pub f2_range: (f64, f64),
    pub exhaustive: Vec<ExhaustiveClaim>,
    pub skipped: Vec<SkippedInstance>,
    pub sampled: Vec<SampledClaim>,
    pub null_availability: Vec<NullAvailabilityReport>,
}

impl ClaimReport {
    pub fn all_intervals_valid(&self) -> bool {
        let ex = self.exhaustive.iter().all(|e| {
            [&e.w1, &e.f1, &e.f2, &e.success_m2].iter().all(|m| m.is_valid())
        });
        // per-class payoffs are undefined when a run never enters the class
        let sa = self.sampled.iter().all(|s| {
            s.success_m2.is_valid()
                && s.w1.is_valid()
                && [&s.f1, &s.f2].iter().all(|m| m.samples == 0 || m.is_valid())
        });
        ex && sa && !self.exhaustive.is_empty() && !self.sampled.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimConfig {
    pub seed: u64,
    pub alpha: f64,
    /// Jump probability that makes the exact chains ergodic.
    pub epsilon: f64,
    /// Random source formulas per `(n, c)` pair for the exhaustive checks.
    pub exhaustive_per_size: usize,
    pub exhaustive_sizes: Vec<(usize, usize)>,
    /// Source clause counts of two-occurrence formulas for exhaustive checks.
    pub exhaustive_two_occurrence: Vec<usize>,
    pub sampled_sizes: Vec<(usize, usize)>,
    pub sampled_runs: u64,
    /// Search steps per sampled size in the null-availability search.
    pub null_search_steps: u64,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        ClaimConfig {
            seed: 0,
            alpha: 0.75,
            epsilon: 1e-3,
            exhaustive_per_size: 3,
            exhaustive_sizes: vec![(3, 1), (3, 2), (4, 2), (3, 3), (4, 3)],
            exhaustive_two_occurrence: vec![2, 3],
            sampled_sizes: vec![(10, 30), (20, 60), (30, 90)],
            sampled_runs: 200,
            null_search_steps: 200_000,
        }
    }
}

/// Probability mass on models after `steps` moves of `chain` from the
/// uniform distribution. Models are absorbing in chains built without jumps.
pub fn exact_success_probability(chain: &TransitionMatrix, solved: &[usize], steps: u64) -> f64 {
    let size = chain.size();
    let mut dist = vec![1.0 / size as f64; size];
    for _ in 0..steps {
        dist = chain.left_mul(&dist);
    }
    solved.iter().map(|&s| dist[s]).sum()
}

fn exhaustive_claim(
    label: String,
    source: &CnfFormula,
    cfg: &ClaimConfig,
    limits: &ChainLimits,
) -> Result<ExhaustiveClaim, MarkovError> {
    let (clustered, _) = clusterize(source);
    let report = analyze(&clustered, cfg.alpha, cfg.epsilon, limits)?;
    let partition = partition_states(&clustered, limits)?;
    let absorbing = build_chain(&clustered, cfg.alpha, 0.0, limits)?;
    let m = clustered.num_clauses() as u64;
    let p_m2 = exact_success_probability(&absorbing, &partition.solved, m * m);
    let p_9m2 = exact_success_probability(&absorbing, &partition.solved, 9 * m * m);
    let w1 = report.w2state[0];
    Ok(ExhaustiveClaim {
        label,
        source_vars: source.num_vars(),
        source_clauses: source.num_clauses(),
        num_vars: clustered.num_vars(),
        m: clustered.num_clauses(),
        satisfiable: !partition.solved.is_empty(),
        w1: Measured::exact(w1, compare_range(w1, w1, (W1_LOWER, 1.0))),
        f1: Measured::exact(report.f1, compare_range(report.f1, report.f1, F1_RANGE)),
        f2: Measured::exact(report.f2, compare_range(report.f2, report.f2, F2_RANGE)),
        payoff_state_violations: report.payoff_state_violations,
        e_per_step: report.E_per_step,
        e_lower_bound: report.E_lower_bound,
        success_m2: Measured::exact(p_m2, compare_point(p_m2, p_m2, SUCCESS_REFERENCE)),
        success_9m2: p_9m2,
    })
}

/// Trajectory estimates `(w1, f1, f2)` of one recorded run. The class means
/// are `None` when the run made no flip from that class.
pub fn run_class_estimates(run: &RunResult) -> Option<(f64, Option<f64>, Option<f64>)> {
    let log = run.flip_log.as_ref()?;
    let (mut np, mut sp, mut nn, mut sn) = (0usize, 0i64, 0usize, 0i64);
    for rec in log {
        if let Move::Flip { delta, from, .. } = rec.mv {
            match from {
                StateKind::Positive => {
                    np += 1;
                    sp += delta as i64;
                }
                _ => {
                    nn += 1;
                    sn += delta as i64;
                }
            }
        }
    }
    let total = np + nn;
    if total == 0 {
        return None;
    }
    let mean = |s: i64, k: usize| (k > 0).then(|| s as f64 / k as f64);
    Some((np as f64 / total as f64, mean(sp, np), mean(sn, nn)))
}

fn sampled_claim(
    idx: usize,
    (n, c): (usize, usize),
    cfg: &ClaimConfig,
) -> Result<SampledClaim, ExperimentError> {
    let gen = GeneratorConfig { n, c, planted: true, seed: derive_seed(cfg.seed, &[2, idx as u64]) };
    let inst = generate_random_3sat(&gen)?;
    let (clustered, _) = clusterize(&inst.formula);
    let base = SparrowParams { alpha: cfg.alpha, budget_multiplier: 1, epsilon: 0.0, seed: 0, record: true };
    let runs: Vec<RunResult> = (0..cfg.sampled_runs)
        .into_par_iter()
        .map(|t| clustered_sparrow(&clustered, &base.with_seed(derive_seed(cfg.seed, &[3, idx as u64, t]))))
        .collect::<Result<_, _>>()?;
    let successes = runs.iter().filter(|r| r.is_solved()).count() as u64;
    let total = runs.len() as u64;
    let rate = if total == 0 { 0.0 } else { successes as f64 / total as f64 };
    let (lo, hi) = wilson_interval(successes, total, Z95);
    let est: Vec<_> = runs.iter().filter_map(run_class_estimates).collect();
    let w1s: Vec<f64> = est.iter().map(|e| e.0).collect();
    let f1s: Vec<f64> = est.iter().filter_map(|e| e.1).collect();
    let f2s: Vec<f64> = est.iter().filter_map(|e| e.2).collect();
    let w1 = mean_interval(&w1s);
    let w1_finding = if w1.samples < 2 {
        Finding::Inconclusive
    } else if w1.low >= W1_LOWER {
        Finding::Agrees
    } else if w1.high < W1_LOWER {
        Finding::Disagrees
    } else {
        Finding::Inconclusive
    };
    Ok(SampledClaim {
        label: format!("planted n={n} c={c}"),
        n,
        c,
        m: clustered.num_clauses(),
        n_star: clustered.num_vars(),
        runs: total,
        budget: base.budget(clustered.num_clauses()),
        success_m2: Measured {
            value: rate,
            low: lo,
            high: hi,
            samples: total as usize,
            finding: compare_point(lo, hi, SUCCESS_REFERENCE),
        },
        w1: Measured { value: w1.mean, low: w1.low, high: w1.high, samples: w1.samples, finding: w1_finding },
        f1: Measured::from_mean(mean_interval(&f1s), F1_RANGE),
        f2: Measured::from_mean(mean_interval(&f2s), F2_RANGE),
    })
}

/// Runs every exhaustive and sampled check in `cfg`.
pub fn claim_checks(cfg: &ClaimConfig) -> Result<ClaimReport, ExperimentError> {
    let limits = ChainLimits::default();
    let mut sources: Vec<(String, CnfFormula)> = Vec::new();
    for (i, &(n, c)) in cfg.exhaustive_sizes.iter().enumerate() {
        for k in 0..cfg.exhaustive_per_size {
            for planted in [false, true] {
                let seed = derive_seed(cfg.seed, &[0, i as u64, k as u64, planted as u64]);
                let f = generate_random_3sat(&GeneratorConfig { n, c, planted, seed })?.formula;
                let kind = if planted { "planted" } else { "uniform" };
                sources.push((format!("{kind} n={n} c={c} #{k}"), f));
            }
        }
    }
    for (i, &c) in cfg.exhaustive_two_occurrence.iter().enumerate() {
        for k in 0..cfg.exhaustive_per_size {
            let f = generate_two_occurrence(c, derive_seed(cfg.seed, &[1, i as u64, k as u64]))?.formula;
            sources.push((format!("two-occurrence c={c} #{k}"), f));
        }
    }

    let mut null_availability: Vec<NullAvailabilityReport> = sources
        .par_iter()
        .map(|(label, f)| null_availability_search(label, &clusterize(f).0, cfg.alpha, 0, 0))
        .collect();

    let outcomes: Vec<Result<ExhaustiveClaim, SkippedInstance>> = sources
        .into_par_iter()
        .map(|(label, f)| {
            exhaustive_claim(label.clone(), &f, cfg, &limits)
                .map_err(|e| SkippedInstance { label, reason: e.to_string() })
        })
        .collect();
    let mut exhaustive = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(e) => exhaustive.push(e),
            Err(s) => skipped.push(s),
        }
    }

    let sampled = cfg
        .sampled_sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| sampled_claim(i, size, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let sampled_null: Vec<NullAvailabilityReport> = cfg
        .sampled_sizes
        .par_iter()
        .enumerate()
        .map(|(i, &(n, c))| {
            let gen = GeneratorConfig { n, c, planted: true, seed: derive_seed(cfg.seed, &[2, i as u64]) };
            let f = generate_random_3sat(&gen).map(|g| clusterize(&g.formula).0)?;
            let seed = derive_seed(cfg.seed, &[4, i as u64]);
            Ok(null_availability_search(&format!("planted n={n} c={c}"), &f, cfg.alpha, cfg.null_search_steps, seed))
        })
        .collect::<Result<_, ExperimentError>>()?;
    null_availability.extend(sampled_null);

    Ok(ClaimReport {
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        success_reference: SUCCESS_REFERENCE,
        w1_lower: W1_LOWER,
        f1_range: F1_RANGE,
        f2_range: F2_RANGE,
        exhaustive,
        skipped,
        sampled,
        null_availability,
    })
}
