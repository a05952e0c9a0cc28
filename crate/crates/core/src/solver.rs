//! The clustered Sparrow local search and the Schöning random walk.
//!
//! # Randomness
//!
//! A run draws from its own [`SearchRng`] in a fixed order: the initial
//! assignment (one `bool` per variable), then per step the epsilon test (only
//! when `epsilon > 0`), the class coin (only when at least two flip classes
//! are available) and finally the uniform index into the chosen pool. A jump
//! draws a fresh assignment the same way as the initial one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{clusterize, recover_assignment};
use crate::flip::{FlipClass, SearchState, StateClassification, StateKind};
use crate::formula::{Assignment, CnfFormula};
use crate::rng::{random_assignment, rng_from_seed, SearchRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("no candidate flip in a solved state")]
    NoCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparrowParams {
    /// Probability of taking the highest available flip class.
    pub alpha: f64,
    /// The step budget is `budget_multiplier · m²`, with `m` the clause count.
    pub budget_multiplier: u64,
    /// Per-step probability of jumping to a uniformly random assignment.
    pub epsilon: f64,
    pub seed: u64,
    /// Keep the satisfied-count trajectory and the move log.
    pub record: bool,
}

impl Default for SparrowParams {
    fn default() -> Self {
        SparrowParams { alpha: 0.75, budget_multiplier: 9, epsilon: 0.0, seed: 0, record: false }
    }
}

impl SparrowParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SolverError::InvalidParams(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.budget_multiplier < 1 {
            return Err(SolverError::InvalidParams("budget multiplier must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(SolverError::InvalidParams(format!("epsilon must lie in [0,1), got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn budget(&self, num_clauses: usize) -> u64 {
        let m = num_clauses as u64;
        self.budget_multiplier.saturating_mul(m.saturating_mul(m))
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SparrowParams { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Solved,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    Flip { var: usize, class: FlipClass, delta: i32, from: StateKind },
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: u64,
    pub mv: Move,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: RunStatus,
    pub model: Option<Assignment>,
    /// Moves performed: flips plus jumps.
    pub steps_used: u64,
    pub budget: u64,
    pub restarts_used: u64,
    /// Satisfied-clause count before the first move and after each move.
    pub trajectory: Option<Vec<usize>>,
    pub flip_log: Option<Vec<MoveRecord>>,
}

impl RunResult {
    pub fn is_solved(&self) -> bool {
        self.status == RunStatus::Solved
    }

    pub fn negative_flips(&self) -> usize {
        self.flip_log.as_ref().map_or(0, |log| {
            log.iter().filter(|r| matches!(r.mv, Move::Flip { class: FlipClass::Negative, .. })).count()
        })
    }
}

/// Flip classes present in `sc`, best first.
fn available_classes(sc: &StateClassification) -> Vec<FlipClass> {
    [FlipClass::Positive, FlipClass::Null, FlipClass::Negative]
        .into_iter()
        .filter(|&c| !sc.class_vars(c).is_empty())
        .collect()
}

/// The pool a step samples from, given the class coin `coin ∈ [0,1)`.
///
/// With a single available class the coin is irrelevant. Otherwise the best
/// class is taken when `coin < alpha`, and the union of the remaining classes
/// (ascending by variable) otherwise.
pub fn choose_pool(sc: &StateClassification, alpha: f64, coin: f64) -> Vec<usize> {
    let classes = available_classes(sc);
    match classes.as_slice() {
        [] => vec![],
        [only] => sc.class_vars(*only).to_vec(),
        [best, rest @ ..] => {
            if coin < alpha {
                sc.class_vars(*best).to_vec()
            } else {
                let mut pool: Vec<usize> = rest.iter().flat_map(|&c| sc.class_vars(c).iter().copied()).collect();
                pool.sort_unstable();
                pool
            }
        }
    }
}

/// Exact one-step selection law: probability of flipping each candidate,
/// ascending by variable.
pub fn flip_law(sc: &StateClassification, alpha: f64) -> Vec<(usize, f64)> {
    let classes = available_classes(sc);
    let mut law: Vec<(usize, f64)> = match classes.as_slice() {
        [] => vec![],
        [only] => {
            let vars = sc.class_vars(*only);
            let p = 1.0 / vars.len() as f64;
            vars.iter().map(|&v| (v, p)).collect()
        }
        [best, rest @ ..] => {
            let top = sc.class_vars(*best);
            let p_top = alpha / top.len() as f64;
            let rest_len: usize = rest.iter().map(|&c| sc.class_vars(c).len()).sum();
            let p_rest = (1.0 - alpha) / rest_len as f64;
            top.iter()
                .map(|&v| (v, p_top))
                .chain(rest.iter().flat_map(|&c| sc.class_vars(c).iter().map(move |&v| (v, p_rest))))
                .collect()
        }
    };
    law.sort_unstable_by_key(|&(v, _)| v);
    law
}

pub fn select_flip<R: Rng + ?Sized>(sc: &StateClassification, alpha: f64, rng: &mut R) -> Result<usize, SolverError> {
    let classes = available_classes(sc);
    if classes.is_empty() {
        return Err(SolverError::NoCandidates);
    }
    let coin = if classes.len() >= 2 { rng.random::<f64>() } else { 0.0 };
    let pool = choose_pool(sc, alpha, coin);
    Ok(pool[rng.random_range(0..pool.len())])
}

/// Runs the clustered Sparrow search on `formula` (normally the output of
/// [`clusterize`]).
pub fn clustered_sparrow(formula: &CnfFormula, params: &SparrowParams) -> Result<RunResult, SolverError> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let n = formula.num_vars();
    let budget = params.budget(formula.num_clauses());
    let mut state = SearchState::new(formula, random_assignment(&mut rng, n)).expect("assignment sized to formula");

    let mut trajectory = params.record.then(|| vec![state.num_satisfied()]);
    let mut log = params.record.then(Vec::new);

    let mut step = 0;
    while step < budget && !state.is_model() {
        let mv = if params.epsilon > 0.0 && rng.random::<f64>() < params.epsilon {
            state.reset(random_assignment(&mut rng, n));
            Move::Jump
        } else {
            let sc = state.classify();
            let var = select_flip(&sc, params.alpha, &mut rng)?;
            let d = sc.delta_of(var).expect("selected variable is a candidate");
            state.flip(var);
            Move::Flip { var, class: d.class(), delta: d.delta(), from: sc.kind }
        };
        if let Some(t) = trajectory.as_mut() {
            t.push(state.num_satisfied());
        }
        if let Some(l) = log.as_mut() {
            l.push(MoveRecord { step, mv });
        }
        step += 1;
    }

    let solved = state.is_model();
    Ok(RunResult {
        status: if solved { RunStatus::Solved } else { RunStatus::BudgetExhausted },
        model: solved.then(|| state.assignment().clone()),
        steps_used: step,
        budget,
        restarts_used: 1,
        trajectory,
        flip_log: log,
    })
}

/// Schöning's walk: up to `restarts` tries, each a uniform random assignment
/// followed by `3n` flips of a random literal of a random falsified clause.
/// `steps_used` counts flips over all tries.
pub fn schoening_walk(formula: &CnfFormula, restarts: u64, seed: u64) -> RunResult {
    let mut rng: SearchRng = rng_from_seed(seed);
    let n = formula.num_vars();
    let per_try = 3 * n as u64;
    let mut state = SearchState::new(formula, Assignment::all_false(n)).expect("sized to formula");
    let mut flips = 0;

    for attempt in 0..restarts {
        state.reset(random_assignment(&mut rng, n));
        for _ in 0..per_try {
            if state.is_model() {
                break;
            }
            let unsat = state.unsat_clauses();
            let clause = formula.clause(unsat[rng.random_range(0..unsat.len())]);
            let lit = clause.literals()[rng.random_range(0..clause.len())];
            state.flip(lit.var);
            flips += 1;
        }
        if state.is_model() {
            return RunResult {
                status: RunStatus::Solved,
                model: Some(state.assignment().clone()),
                steps_used: flips,
                budget: per_try * restarts,
                restarts_used: attempt + 1,
                trajectory: None,
                flip_log: None,
            };
        }
    }
    RunResult {
        status: RunStatus::BudgetExhausted,
        model: None,
        steps_used: flips,
        budget: per_try * restarts,
        restarts_used: restarts,
        trajectory: None,
        flip_log: None,
    }
}

/// Clusterizes `formula`, searches the clustered formula and maps any model
/// back. The returned model is over the variables of `formula`; trajectory and
/// move log refer to the clustered formula.
pub fn solve_end_to_end(formula: &CnfFormula, params: &SparrowParams) -> Result<RunResult, SolverError> {
    let (clustered, map) = clusterize(formula);
    let mut result = clustered_sparrow(&clustered, params)?;
    if let Some(model) = result.model.take() {
        let original = recover_assignment(&map, &model).expect("model sized to clustered formula");
        assert!(formula.is_model(&original), "recovered assignment must satisfy the source formula");
        result.model = Some(original);
    }
    Ok(result)
}
