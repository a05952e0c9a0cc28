use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::formula::{Assignment, Clause, CnfFormula, Literal};
use crate::rng::{random_assignment, rng_from_seed, SearchRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub c: usize,
    /// Embed a hidden model and only emit clauses it satisfies.
    pub planted: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInstance {
    pub formula: CnfFormula,
    pub hidden: Option<Assignment>,
}

fn polarized<R: Rng>(rng: &mut R, vars: &[usize], hidden: Option<&Assignment>) -> Clause {
    loop {
        let lits: Vec<Literal> = vars.iter().map(|&v| Literal { var: v, negated: rng.random::<bool>() }).collect();
        let ok = hidden.is_none_or(|h| lits.iter().any(|l| l.eval(h.get(l.var))));
        if ok {
            return Clause::new(lits);
        }
    }
}

/// Uniform random 3-CNF: each clause picks three distinct variables and
/// independent uniform signs. In planted mode the hidden assignment is drawn
/// first and a clause's signs are redrawn until it is satisfied.
pub fn generate_random_3sat(cfg: &GeneratorConfig) -> Result<GeneratedInstance, ExperimentError> {
    if cfg.n < 3 {
        return Err(ExperimentError::InvalidConfig(format!("need at least 3 variables, got {}", cfg.n)));
    }
    if cfg.c < 1 {
        return Err(ExperimentError::InvalidConfig("need at least one clause".into()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let hidden = cfg.planted.then(|| random_assignment(&mut rng, cfg.n));
    let clauses = (0..cfg.c)
        .map(|_| {
            let mut vars = index::sample(&mut rng, cfg.n, 3).into_vec();
            vars.sort_unstable();
            polarized(&mut rng, &vars, hidden.as_ref())
        })
        .collect();
    let formula = CnfFormula::new(cfg.n, clauses).expect("distinct variables per clause");
    Ok(GeneratedInstance { formula, hidden })
}

/// Planted 3-CNF with `c` clauses in which every variable occurs exactly
/// twice, in two different clauses (one variable occurs once when `3c` is
/// odd). Its clustered form has `c + 2·⌊3c/2⌋` clauses.
pub fn generate_two_occurrence(c: usize, seed: u64) -> Result<GeneratedInstance, ExperimentError> {
    if c < 2 {
        return Err(ExperimentError::InvalidConfig("need at least two clauses".into()));
    }
    let mut rng: SearchRng = rng_from_seed(seed);
    let slots = 3 * c;
    let n = slots.div_ceil(2);
    // slot s belongs to clause s / 3; consecutive shuffled slots share a variable
    let mut order: Vec<usize> = (0..slots).collect();
    loop {
        order.shuffle(&mut rng);
        if order.chunks(2).all(|p| p.len() == 1 || p[0] / 3 != p[1] / 3) {
            break;
        }
    }
    let mut slot_var = vec![0usize; slots];
    for (v, pair) in order.chunks(2).enumerate() {
        for &s in pair {
            slot_var[s] = v;
        }
    }
    let hidden = random_assignment(&mut rng, n);
    let clauses = (0..c).map(|ci| polarized(&mut rng, &slot_var[3 * ci..3 * ci + 3], Some(&hidden))).collect();
    let formula = CnfFormula::new(n, clauses).expect("paired slots lie in different clauses");
    Ok(GeneratedInstance { formula, hidden: Some(hidden) })
}

/// Exhaustive satisfiability check; returns a model if one exists.
pub fn brute_force_model(formula: &CnfFormula) -> Option<Assignment> {
    let n = formula.num_vars();
    assert!(n < 32, "exhaustive search over {n} variables");
    (0..1u64 << n).map(|bits| Assignment::from_bits(bits, n)).find(|a| formula.is_model(a))
}
