//! Occurrence-splitting transform that bounds every variable to three clauses.
//!
//! Each occurrence of an original variable gets its own fresh copy. Copies of
//! one variable are tied together by an implication cycle of 2-clauses
//! `(v_1 ∨ ¬v_2) ∧ (v_2 ∨ ¬v_3) ∧ … ∧ (v_m ∨ ¬v_1)`, which holds exactly when
//! all copies agree. A copy therefore sits in one original clause plus two
//! cycle clauses, once positive and once negative.

use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Clause, CnfFormula, FormulaError, Literal};

/// Correspondence between original variables and their copies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    forward: Vec<Vec<usize>>,
    backward: Vec<(usize, usize)>,
}

impl VarMap {
    /// Copies of `original`, in occurrence order. Empty when the variable never
    /// occurs in the source formula.
    pub fn copies(&self, original: usize) -> &[usize] {
        &self.forward[original]
    }

    /// `(original variable, 0-based copy index)` of a clustered variable.
    pub fn origin(&self, clustered: usize) -> (usize, usize) {
        self.backward[clustered]
    }

    pub fn num_original(&self) -> usize {
        self.forward.len()
    }

    pub fn num_clustered(&self) -> usize {
        self.backward.len()
    }

    /// Sidecar lines `<clustered_var> <original_var> <copy_index>`, all 1-based.
    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for (c, &(o, k)) in self.backward.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", c + 1, o + 1, k + 1));
        }
        out
    }

    /// Lifts an assignment of the source formula: every copy takes the value of
    /// its original.
    pub fn lift_assignment(&self, a: &Assignment) -> Result<Assignment, FormulaError> {
        if a.len() != self.num_original() {
            return Err(FormulaError::LengthMismatch { expected: self.num_original(), found: a.len() });
        }
        Ok(Assignment::new(self.backward.iter().map(|&(o, _)| a.get(o)).collect()))
    }
}

pub fn clusterize(formula: &CnfFormula) -> (CnfFormula, VarMap) {
    let n = formula.num_vars();
    let mut forward: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut backward = Vec::with_capacity(formula.num_literals());
    for v in 0..n {
        let base = backward.len();
        let count = formula.occurrences(v).len();
        forward.push((base..base + count).collect());
        backward.extend((0..count).map(|k| (v, k)));
    }

    // occurrences are stored in clause-scan order, so the k-th time we meet
    // variable v while scanning clauses it is copy k
    let mut seen = vec![0usize; n];
    let mut clauses: Vec<Clause> = formula
        .clauses()
        .iter()
        .map(|c| {
            Clause::new(
                c.literals()
                    .iter()
                    .map(|l| {
                        let copy = forward[l.var][seen[l.var]];
                        seen[l.var] += 1;
                        Literal { var: copy, negated: l.negated }
                    })
                    .collect(),
            )
        })
        .collect();

    for copies in &forward {
        let m = copies.len();
        if m < 2 {
            continue;
        }
        for i in 0..m {
            clauses.push(Clause::new(vec![Literal::pos(copies[i]), Literal::neg(copies[(i + 1) % m])]));
        }
    }

    let clustered = CnfFormula::new(backward.len(), clauses).expect("clustered clauses are well formed");
    (clustered, VarMap { forward, backward })
}

/// Projects an assignment of the clustered formula onto the originals, using
/// the first copy of each variable. Variables without copies come back false.
pub fn recover_assignment(map: &VarMap, clustered: &Assignment) -> Result<Assignment, FormulaError> {
    if clustered.len() != map.num_clustered() {
        return Err(FormulaError::LengthMismatch { expected: map.num_clustered(), found: clustered.len() });
    }
    Ok(Assignment::new(
        map.forward.iter().map(|copies| copies.first().is_some_and(|&c| clustered.get(c))).collect(),
    ))
}

/// Per-variable counts that exceed the bounded-occurrence shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeViolation {
    pub var: usize,
    pub clauses: usize,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterShapeReport {
    pub max_clauses_per_var: usize,
    pub max_occurrences_per_literal: usize,
    pub violations: Vec<ShapeViolation>,
}

impl ClusterShapeReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const MAX_CLAUSES_PER_VAR: usize = 3;
pub const MAX_OCCURRENCES_PER_LITERAL: usize = 2;

pub fn verify_cluster_shape(formula: &CnfFormula) -> ClusterShapeReport {
    let mut report = ClusterShapeReport { max_clauses_per_var: 0, max_occurrences_per_literal: 0, violations: vec![] };
    for v in 0..formula.num_vars() {
        let occ = formula.occurrences(v);
        // a variable appears at most once per clause, so occurrences = clauses
        let clauses = occ.len();
        let negative = occ.iter().filter(|o| o.negated).count();
        let positive = clauses - negative;
        report.max_clauses_per_var = report.max_clauses_per_var.max(clauses);
        report.max_occurrences_per_literal = report.max_occurrences_per_literal.max(positive.max(negative));
        if clauses > MAX_CLAUSES_PER_VAR || positive.max(negative) > MAX_OCCURRENCES_PER_LITERAL {
            report.violations.push(ShapeViolation { var: v, clauses, positive, negative });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(num_vars, clauses).unwrap()
    }

    #[test]
    fn single_occurrences_need_no_cycle() {
        let (star, map) = clusterize(&f(3, &[&[1, 2, 3]]));
        assert_eq!(star, f(3, &[&[1, 2, 3]]));
        assert_eq!(map.copies(0), &[0]);
        assert_eq!(map.origin(2), (2, 0));
    }

    #[test]
    fn two_clause_example_by_hand() {
        // x=1 y=2 z=3 w=4: (x∨y∨z)∧(¬x∨y∨w)
        let (star, map) = clusterize(&f(4, &[&[1, 2, 3], &[-1, 2, 4]]));
        // x -> 1,2 ; y -> 3,4 ; z -> 5 ; w -> 6
        let expected = f(6, &[&[1, 3, 5], &[-2, 4, 6], &[1, -2], &[2, -1], &[3, -4], &[4, -3]]);
        assert_eq!(star, expected);
        assert_eq!(map.copies(1), &[2, 3]);
        assert_eq!(map.to_sidecar(), "1 1 1\n2 1 2\n3 2 1\n4 2 2\n5 3 1\n6 4 1\n");
    }

    #[test]
    fn unused_variables_get_no_copy() {
        let (star, map) = clusterize(&f(3, &[&[1, 3]]));
        assert_eq!(star.num_vars(), 2);
        assert!(map.copies(1).is_empty());
        let back = recover_assignment(&map, &Assignment::new(vec![true, true])).unwrap();
        assert_eq!(back.values(), &[true, false, true]);
    }

    #[test]
    fn recover_projects_first_copy() {
        let (_, map) = clusterize(&f(4, &[&[1, 2, 3], &[-1, 2, 4]]));
        let all_false = recover_assignment(&map, &Assignment::all_false(6)).unwrap();
        assert_eq!(all_false, Assignment::all_false(4));
        // copies of x disagree: first copy wins
        let a = Assignment::new(vec![false, true, false, false, false, false]);
        assert!(!recover_assignment(&map, &a).unwrap().get(0));
        assert!(recover_assignment(&map, &Assignment::all_false(5)).is_err());
    }

    #[test]
    fn shape_violation_is_reported() {
        let report = verify_cluster_shape(&f(1, &[&[1], &[1], &[1], &[1]]));
        assert_eq!(report.violations, vec![ShapeViolation { var: 0, clauses: 4, positive: 4, negative: 0 }]);
        assert_eq!(report.max_clauses_per_var, 4);
        // three clauses but one literal three times
        let report = verify_cluster_shape(&f(1, &[&[1], &[1], &[1]]));
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn clustered_copy_polarity_profile() {
        let (star, _) = clusterize(&f(4, &[&[1, 2, 3], &[-1, 2, 4], &[1, -4]]));
        for v in 0..star.num_vars() {
            let occ = star.occurrences(v);
            if occ.len() == 3 {
                let neg = occ.iter().filter(|o| o.negated).count();
                assert!(neg == 1 || neg == 2, "var {v}: {occ:?}");
            }
        }
        assert!(verify_cluster_shape(&star).is_clean());
    }
}
