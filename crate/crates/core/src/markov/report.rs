use serde::{Deserialize, Serialize};

use super::chain::{build_chain, partition_states, stationary, ChainLimits, StationaryOptions};
use super::payoff::{measure_class_payoffs, F1_BOUNDS, F2_BOUNDS};
use super::two_state::{eq6_holds, expected_gain_bound, lump_two_state};
use super::MarkovError;
use crate::formula::CnfFormula;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub holds: bool,
}

impl BoundCheck {
    fn new(name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        const TOL: f64 = 1e-12;
        let holds = lower.is_none_or(|lo| value >= lo - TOL) && upper.is_none_or(|hi| value <= hi + TOL);
        BoundCheck { name: name.to_string(), value, lower, upper, holds }
    }
}

/// Everything the `analyze` command reports for one formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct AnalysisReport {
    pub num_vars: usize,
    pub num_states: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub stationary_residual: f64,
    pub model_mass: f64,
    pub num_positive_states: usize,
    pub num_non_positive_states: usize,
    pub num_model_states: usize,
    pub W_plus: f64,
    pub W_minus: f64,
    pub a: f64,
    pub b: f64,
    pub a_direct: f64,
    pub b_direct: f64,
    pub flow_imbalance: f64,
    pub w2state: [f64; 2],
    pub Z: [[f64; 2]; 2],
    pub sigma_sq: [f64; 2],
    pub f1: f64,
    pub f2: f64,
    pub E_per_step: f64,
    pub E_lower_bound: f64,
    pub eq6_holds: bool,
    pub payoff_state_violations: usize,
    pub bound_checks: Vec<BoundCheck>,
    /// Expected return time `1 / w_i` of every state of the full chain.
    pub return_times: Vec<f64>,
}

pub fn analyze(
    formula: &CnfFormula,
    alpha: f64,
    epsilon: f64,
    limits: &ChainLimits,
) -> Result<AnalysisReport, MarkovError> {
    let m = build_chain(formula, alpha, epsilon, limits)?;
    let w = stationary(&m, &StationaryOptions::default())?;
    let partition = partition_states(formula, limits)?;
    let lumped = lump_two_state(&m, &w, &partition)?;
    let payoff = measure_class_payoffs(formula, alpha, &w, &partition)?;
    let model_mass: f64 = partition.solved.iter().map(|&s| w.w[s]).sum();
    let w1 = lumped.chain.w[0];

    let bound_checks = vec![
        BoundCheck::new("w1 >= 1/5", w1, Some(0.2), None),
        BoundCheck::new("f1 in [1/2, 1]", payoff.f1, Some(F1_BOUNDS.0), Some(F1_BOUNDS.1)),
        BoundCheck::new("f2 in [-1/4, 0]", payoff.f2, Some(F2_BOUNDS.0), Some(F2_BOUNDS.1)),
        BoundCheck::new("E >= 3/4 w1 - 1/4", payoff.e_per_step, Some(expected_gain_bound(w1)), None),
        BoundCheck::new("min per-state f1 >= 1/2", payoff.f1_state_range.0, Some(F1_BOUNDS.0), None),
        BoundCheck::new("max per-state f1 <= 1", payoff.f1_state_range.1, None, Some(F1_BOUNDS.1)),
        BoundCheck::new("min per-state f2 >= -1/4", payoff.f2_state_range.0, Some(F2_BOUNDS.0), None),
        BoundCheck::new("max per-state f2 <= 0", payoff.f2_state_range.1, None, Some(F2_BOUNDS.1)),
    ];

    Ok(AnalysisReport {
        num_vars: formula.num_vars(),
        num_states: m.size(),
        alpha,
        epsilon,
        stationary_residual: w.residual,
        model_mass,
        num_positive_states: partition.positive.len(),
        num_non_positive_states: partition.non_positive.len(),
        num_model_states: partition.solved.len(),
        W_plus: lumped.w_plus,
        W_minus: lumped.w_minus,
        a: lumped.chain.a,
        b: lumped.chain.b,
        a_direct: lumped.a_direct,
        b_direct: lumped.b_direct,
        flow_imbalance: lumped.flow_imbalance(),
        w2state: lumped.chain.w,
        Z: lumped.chain.z,
        sigma_sq: lumped.chain.sigma_sq,
        f1: payoff.f1,
        f2: payoff.f2,
        E_per_step: payoff.e_per_step,
        E_lower_bound: expected_gain_bound(w1),
        eq6_holds: eq6_holds(w1),
        payoff_state_violations: payoff.state_violations,
        bound_checks,
        return_times: w.w.iter().map(|&x| 1.0 / x).collect(),
    })
}
