//! CNF data model and assignment evaluation.
//!
//! Variables are 0-based everywhere inside the crate. The DIMACS reader and
//! writer in [`crate::dimacs`] are the only places that translate to and from
//! the 1-based external numbering.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest clause the crate accepts.
pub const MAX_CLAUSE_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("clause {clause} has {width} literals, at most {MAX_CLAUSE_WIDTH} are supported")]
    ClauseTooWide { clause: usize, width: usize },
    #[error("clause {clause} contains variable {var} in both polarities")]
    TautologicalClause { clause: usize, var: usize },
    #[error("clause {clause} repeats the literal on variable {var}")]
    DuplicateLiteral { clause: usize, var: usize },
    #[error("clause {clause} mentions variable {var} but the formula has {num_vars} variables")]
    VarOutOfRange { clause: usize, var: usize, num_vars: usize },
    #[error("assignment has {found} values, formula has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
}

/// A variable together with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub const fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub const fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// Truth value of the literal when its variable has value `value`.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }

    /// Signed 1-based DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal { var: self.var, negated: !self.negated }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of one to three literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Unchecked construction; validation happens when the clause is placed in a
    /// [`CnfFormula`].
    pub fn new(lits: Vec<Literal>) -> Self {
        Clause { lits }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.lits.iter().any(|l| l.eval(a.get(l.var)))
    }

    fn validate(&self, index: usize, num_vars: usize) -> Result<(), FormulaError> {
        if self.lits.is_empty() {
            return Err(FormulaError::EmptyClause { clause: index });
        }
        if self.lits.len() > MAX_CLAUSE_WIDTH {
            return Err(FormulaError::ClauseTooWide { clause: index, width: self.lits.len() });
        }
        for (i, l) in self.lits.iter().enumerate() {
            if l.var >= num_vars {
                return Err(FormulaError::VarOutOfRange { clause: index, var: l.var, num_vars });
            }
            for m in &self.lits[..i] {
                if m.var == l.var {
                    return Err(if m.negated == l.negated {
                        FormulaError::DuplicateLiteral { clause: index, var: l.var }
                    } else {
                        FormulaError::TautologicalClause { clause: index, var: l.var }
                    });
                }
            }
        }
        Ok(())
    }
}

impl From<Vec<Literal>> for Clause {
    fn from(lits: Vec<Literal>) -> Self {
        Clause::new(lits)
    }
}

/// Where a variable occurs: clause index and whether the occurrence is negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub clause: usize,
    pub negated: bool,
}

/// A validated CNF formula with at most three literals per clause.
///
/// The occurrence index is built once at construction and is the exact
/// inverse of clause membership.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
    #[serde(skip)]
    occurrences: Vec<Vec<Occurrence>>,
}

impl PartialEq for CnfFormula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for CnfFormula {}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for (i, c) in clauses.iter().enumerate() {
            c.validate(i, num_vars)?;
        }
        let mut occurrences = vec![Vec::new(); num_vars];
        for (ci, c) in clauses.iter().enumerate() {
            for l in c.literals() {
                occurrences[l.var].push(Occurrence { clause: ci, negated: l.negated });
            }
        }
        Ok(CnfFormula { num_vars, clauses, occurrences })
    }

    /// Builds a formula from signed 1-based literals, the way clauses are
    /// written in DIMACS files. Handy in tests.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self, FormulaError> {
        let clauses = clauses
            .iter()
            .map(|c| {
                Clause::new(
                    c.iter()
                        .map(|&x| Literal { var: (x.unsigned_abs() as usize).wrapping_sub(1), negated: x < 0 })
                        .collect(),
                )
            })
            .collect();
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    /// Occurrences of `var` in clause-scan order.
    pub fn occurrences(&self, var: usize) -> &[Occurrence] {
        &self.occurrences[var]
    }

    /// Total number of literal occurrences.
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    fn check_len(&self, a: &Assignment) -> Result<(), FormulaError> {
        if a.len() != self.num_vars {
            return Err(FormulaError::LengthMismatch { expected: self.num_vars, found: a.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Evaluation, FormulaError> {
        self.check_len(a)?;
        let satisfied_count = self.clauses.iter().filter(|c| c.is_satisfied(a)).count();
        Ok(Evaluation { satisfied_count, is_model: satisfied_count == self.clauses.len() })
    }

    /// Indices of falsified clauses, ascending.
    pub fn unsatisfied_clauses(&self, a: &Assignment) -> Result<Vec<usize>, FormulaError> {
        self.check_len(a)?;
        Ok(self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(a))
            .map(|(i, _)| i)
            .collect())
    }

    pub fn is_model(&self, a: &Assignment) -> bool {
        a.len() == self.num_vars && self.clauses.iter().all(|c| c.is_satisfied(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied_count: usize,
    pub is_model: bool,
}

/// One truth value per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Decodes a chain state: variable `i` takes bit `i` of `bits`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Assignment((0..n).map(|i| (bits >> i) & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.0[var]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.0[var] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: usize) {
        self.0[var] = !self.0[var];
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(num_vars, clauses).unwrap()
    }

    #[test]
    fn evaluate_small_cases() {
        let formula = f(2, &[&[1, -2]]);
        let e = formula.evaluate(&Assignment::new(vec![false, true])).unwrap();
        assert_eq!(e, Evaluation { satisfied_count: 0, is_model: false });
        let e = formula.evaluate(&Assignment::new(vec![true, true])).unwrap();
        assert_eq!(e, Evaluation { satisfied_count: 1, is_model: true });
    }

    #[test]
    fn unsatisfied_clause_indices() {
        let formula = f(1, &[&[1], &[-1]]);
        assert_eq!(formula.unsatisfied_clauses(&Assignment::new(vec![true])).unwrap(), vec![1]);
        let formula = f(2, &[&[1, -2]]);
        assert!(formula.unsatisfied_clauses(&Assignment::new(vec![true, true])).unwrap().is_empty());
    }

    #[test]
    fn length_mismatch_is_reported() {
        let formula = f(2, &[&[1, -2]]);
        let err = formula.evaluate(&Assignment::all_false(3)).unwrap_err();
        assert_eq!(err, FormulaError::LengthMismatch { expected: 2, found: 3 });
        assert!(formula.unsatisfied_clauses(&Assignment::all_false(1)).is_err());
    }

    #[test]
    fn construction_rejects_bad_clauses() {
        assert!(matches!(
            CnfFormula::from_dimacs_clauses(2, &[&[1, -1]]),
            Err(FormulaError::TautologicalClause { clause: 0, var: 0 })
        ));
        assert!(matches!(
            CnfFormula::from_dimacs_clauses(2, &[&[2], &[1, 1]]),
            Err(FormulaError::DuplicateLiteral { clause: 1, var: 0 })
        ));
        assert!(matches!(
            CnfFormula::from_dimacs_clauses(4, &[&[1, 2, 3, 4]]),
            Err(FormulaError::ClauseTooWide { width: 4, .. })
        ));
        assert!(matches!(
            CnfFormula::from_dimacs_clauses(2, &[&[3]]),
            Err(FormulaError::VarOutOfRange { var: 2, .. })
        ));
        assert!(matches!(CnfFormula::from_dimacs_clauses(2, &[&[]]), Err(FormulaError::EmptyClause { .. })));
    }

    #[test]
    fn occurrence_index_is_inverse_of_membership() {
        let formula = f(3, &[&[1, -2, 3], &[-1, 2], &[2]]);
        assert_eq!(
            formula.occurrences(1),
            &[
                Occurrence { clause: 0, negated: true },
                Occurrence { clause: 1, negated: false },
                Occurrence { clause: 2, negated: false }
            ]
        );
        for v in 0..formula.num_vars() {
            for occ in formula.occurrences(v) {
                assert!(formula.clause(occ.clause).literals().contains(&Literal { var: v, negated: occ.negated }));
            }
        }
        let total: usize = (0..3).map(|v| formula.occurrences(v).len()).sum();
        assert_eq!(total, formula.num_literals());
    }

    #[test]
    fn bits_round_trip() {
        let a = Assignment::from_bits(0b1011, 5);
        assert_eq!(a.values(), &[true, true, false, true, false]);
        assert_eq!(a.to_bits(), 0b1011);
    }
}
