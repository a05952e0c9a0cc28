use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{StatePartition, StationaryDist};
use super::MarkovError;
use crate::flip::{SearchState, StateKind};
use crate::formula::{Assignment, CnfFormula};
use crate::solver::flip_law;

/// Claimed range of the expected gain in a positive state.
pub const F1_BOUNDS: (f64, f64) = (0.5, 1.0);
/// Claimed range of the expected gain in a non-positive state.
pub const F2_BOUNDS: (f64, f64) = (-0.25, 0.0);

const BOUND_TOL: f64 = 1e-12;
const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffWitness {
    pub state: usize,
    pub kind: StateKind,
    pub expected_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffEstimate {
    /// Stationary-weighted mean expected gain over positive states.
    pub f1: f64,
    /// Same over non-positive states.
    pub f2: f64,
    /// Lumped masses `(W₊, W₋) / (W₊ + W₋)`.
    pub w1: f64,
    pub w2: f64,
    pub e_per_step: f64,
    /// Smallest and largest per-state expected gain in each class.
    pub f1_state_range: (f64, f64),
    pub f2_state_range: (f64, f64),
    pub f1_bounds_hold: bool,
    pub f2_bounds_hold: bool,
    /// Number of states whose own expected gain is outside its class range.
    pub state_violations: usize,
    /// The first few of them.
    pub witnesses: Vec<PayoffWitness>,
}

/// Expected change in satisfied clauses for one search step from `state`,
/// excluding random jumps. Zero for models.
pub fn state_expected_delta(formula: &CnfFormula, alpha: f64, state: usize) -> f64 {
    let s = SearchState::new(formula, Assignment::from_bits(state as u64, formula.num_vars())).expect("sized");
    let sc = s.classify();
    flip_law(&sc, alpha)
        .into_iter()
        .map(|(v, p)| p * f64::from(sc.delta_of(v).expect("law covers candidates").delta()))
        .sum()
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo - BOUND_TOL && x <= hi + BOUND_TOL
}

pub fn measure_class_payoffs(
    formula: &CnfFormula,
    alpha: f64,
    w: &StationaryDist,
    partition: &StatePartition,
) -> Result<PayoffEstimate, MarkovError> {
    let per_class = |states: &[usize]| -> Vec<f64> {
        states.par_iter().map(|&s| state_expected_delta(formula, alpha, s)).collect()
    };
    let pos = per_class(&partition.positive);
    let neg = per_class(&partition.non_positive);

    let weighted = |states: &[usize], values: &[f64]| -> (f64, f64) {
        let mass: f64 = states.iter().map(|&s| w.w[s]).sum();
        let total: f64 = states.iter().zip(values).map(|(&s, &f)| w.w[s] * f).sum();
        (mass, total)
    };
    let (w_plus, t_plus) = weighted(&partition.positive, &pos);
    let (w_minus, t_minus) = weighted(&partition.non_positive, &neg);
    if w_plus <= 0.0 {
        return Err(MarkovError::EmptyClass("positive"));
    }
    if w_minus <= 0.0 {
        return Err(MarkovError::EmptyClass("non-positive"));
    }
    let f1 = t_plus / w_plus;
    let f2 = t_minus / w_minus;
    let w1 = w_plus / (w_plus + w_minus);
    let w2 = 1.0 - w1;

    let range = |v: &[f64]| {
        v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };

    let mut witnesses = Vec::new();
    let mut state_violations = 0;
    for (states, values, bounds, kind) in [
        (&partition.positive, &pos, F1_BOUNDS, StateKind::Positive),
        (&partition.non_positive, &neg, F2_BOUNDS, StateKind::NonPositive),
    ] {
        for (&s, &f) in states.iter().zip(values.iter()) {
            if !within(f, bounds) {
                state_violations += 1;
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(PayoffWitness { state: s, kind, expected_delta: f });
                }
            }
        }
    }

    Ok(PayoffEstimate {
        f1,
        f2,
        w1,
        w2,
        e_per_step: w1 * f1 + w2 * f2,
        f1_state_range: range(&pos),
        f2_state_range: range(&neg),
        f1_bounds_hold: within(f1, F1_BOUNDS),
        f2_bounds_hold: within(f2, F2_BOUNDS),
        state_violations,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_positive_flip_has_unit_gain() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(state_expected_delta(&f, 0.75, 0), 1.0);
        assert_eq!(state_expected_delta(&f, 0.75, 1), 0.0);
    }

    #[test]
    fn mixed_state_gain() {
        // (x1 ∨ x2) ∧ (¬x2 ∨ x3) at all-false: flipping x1 is +1, flipping x2 is 0
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2], &[-2, 3]]).unwrap();
        assert!((state_expected_delta(&f, 0.75, 0) - 0.75).abs() < 1e-15);
    }
}
