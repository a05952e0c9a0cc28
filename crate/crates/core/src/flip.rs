//! Make/break accounting and flip classification.
//!
//! `make` counts clauses that go from falsified to satisfied when a variable
//! is flipped and `brk` counts the reverse; `delta = make - brk` is the change
//! in the number of satisfied clauses. Only variables occurring in a falsified
//! clause are candidates for flipping.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Assignment, CnfFormula, FormulaError, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlipError {
    #[error("variable {var} out of range for {num_vars} variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("flip tables enumerate at most {max} variables, pattern has {found}")]
    TooManyVariables { max: usize, found: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FlipDelta {
    pub make: u32,
    pub brk: u32,
}

impl FlipDelta {
    pub fn delta(self) -> i32 {
        self.make as i32 - self.brk as i32
    }

    pub fn class(self) -> FlipClass {
        classify_flip(self)
    }

    /// The delta of undoing the flip.
    pub fn reversed(self) -> FlipDelta {
        FlipDelta { make: self.brk, brk: self.make }
    }
}

/// Ordered `Negative < Null < Positive`, so `max` picks the higher value flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlipClass {
    Negative,
    Null,
    Positive,
}

impl FlipClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FlipClass::Negative => "negative",
            FlipClass::Null => "null",
            FlipClass::Positive => "positive",
        }
    }
}

impl fmt::Display for FlipClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_flip(d: FlipDelta) -> FlipClass {
    match d.delta() {
        x if x > 0 => FlipClass::Positive,
        0 => FlipClass::Null,
        _ => FlipClass::Negative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    /// At least one positive flip is available.
    Positive,
    /// Only null and negative flips are available.
    NonPositive,
    /// Every clause is satisfied.
    Solved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateClassification {
    pub positive: Vec<usize>,
    pub null: Vec<usize>,
    pub negative: Vec<usize>,
    /// Every candidate with its flip delta, ascending by variable.
    pub deltas: Vec<(usize, FlipDelta)>,
    pub kind: StateKind,
}

impl StateClassification {
    fn from_deltas(deltas: Vec<(usize, FlipDelta)>) -> Self {
        let mut sc = StateClassification {
            positive: vec![],
            null: vec![],
            negative: vec![],
            deltas,
            kind: StateKind::Solved,
        };
        for &(v, d) in &sc.deltas {
            match d.class() {
                FlipClass::Positive => sc.positive.push(v),
                FlipClass::Null => sc.null.push(v),
                FlipClass::Negative => sc.negative.push(v),
            }
        }
        sc.kind = if !sc.positive.is_empty() {
            StateKind::Positive
        } else if sc.deltas.is_empty() {
            StateKind::Solved
        } else {
            StateKind::NonPositive
        };
        sc
    }

    pub fn class_vars(&self, class: FlipClass) -> &[usize] {
        match class {
            FlipClass::Positive => &self.positive,
            FlipClass::Null => &self.null,
            FlipClass::Negative => &self.negative,
        }
    }

    pub fn delta_of(&self, var: usize) -> Option<FlipDelta> {
        self.deltas.binary_search_by_key(&var, |&(v, _)| v).ok().map(|i| self.deltas[i].1)
    }
}

/// Incrementally maintained search position: the assignment, the number of
/// true literals per clause and the set of falsified clauses.
///
/// One instance belongs to one run; `make_break` costs O(occurrences of v).
#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    formula: &'a CnfFormula,
    assignment: Assignment,
    true_counts: Vec<u8>,
    unsat: Vec<usize>,
    unsat_pos: Vec<usize>,
}

const NOT_UNSAT: usize = usize::MAX;

impl<'a> SearchState<'a> {
    pub fn new(formula: &'a CnfFormula, assignment: Assignment) -> Result<Self, FormulaError> {
        if assignment.len() != formula.num_vars() {
            return Err(FormulaError::LengthMismatch { expected: formula.num_vars(), found: assignment.len() });
        }
        let mut state = SearchState {
            formula,
            assignment,
            true_counts: vec![0; formula.num_clauses()],
            unsat: Vec::new(),
            unsat_pos: vec![NOT_UNSAT; formula.num_clauses()],
        };
        state.rebuild();
        Ok(state)
    }

    fn rebuild(&mut self) {
        self.unsat.clear();
        for (ci, clause) in self.formula.clauses().iter().enumerate() {
            let count = clause.literals().iter().filter(|l| l.eval(self.assignment.get(l.var))).count();
            self.true_counts[ci] = count as u8;
            if count == 0 {
                self.unsat_pos[ci] = self.unsat.len();
                self.unsat.push(ci);
            } else {
                self.unsat_pos[ci] = NOT_UNSAT;
            }
        }
    }

    /// Replaces the whole assignment (a random restart or jump).
    pub fn reset(&mut self, assignment: Assignment) {
        assert_eq!(assignment.len(), self.formula.num_vars());
        self.assignment = assignment;
        self.rebuild();
    }

    pub fn formula(&self) -> &'a CnfFormula {
        self.formula
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn num_satisfied(&self) -> usize {
        self.formula.num_clauses() - self.unsat.len()
    }

    pub fn is_model(&self) -> bool {
        self.unsat.is_empty()
    }

    /// Falsified clauses in internal (history-dependent) order.
    pub fn unsat_clauses(&self) -> &[usize] {
        &self.unsat
    }

    pub fn make_break(&self, var: usize) -> FlipDelta {
        let value = self.assignment.get(var);
        let mut d = FlipDelta::default();
        for occ in self.formula.occurrences(var) {
            let lit_true = value != occ.negated;
            let count = self.true_counts[occ.clause];
            if lit_true && count == 1 {
                d.brk += 1;
            } else if !lit_true && count == 0 {
                d.make += 1;
            }
        }
        d
    }

    pub fn flip(&mut self, var: usize) {
        let value = self.assignment.get(var);
        for occ in self.formula.occurrences(var) {
            let ci = occ.clause;
            if value != occ.negated {
                self.true_counts[ci] -= 1;
                if self.true_counts[ci] == 0 {
                    self.unsat_pos[ci] = self.unsat.len();
                    self.unsat.push(ci);
                }
            } else {
                self.true_counts[ci] += 1;
                if self.true_counts[ci] == 1 {
                    let pos = self.unsat_pos[ci];
                    let last = *self.unsat.last().expect("clause was falsified");
                    self.unsat.swap_remove(pos);
                    if last != ci {
                        self.unsat_pos[last] = pos;
                    }
                    self.unsat_pos[ci] = NOT_UNSAT;
                }
            }
        }
        self.assignment.flip(var);
    }

    /// Variables of falsified clauses, ascending.
    pub fn candidates(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .unsat
            .iter()
            .flat_map(|&ci| self.formula.clause(ci).literals().iter().map(|l| l.var))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn classify(&self) -> StateClassification {
        StateClassification::from_deltas(self.candidates().into_iter().map(|v| (v, self.make_break(v))).collect())
    }
}

pub fn make_break(formula: &CnfFormula, a: &Assignment, var: usize) -> Result<FlipDelta, FlipError> {
    if var >= formula.num_vars() {
        return Err(FlipError::VarOutOfRange { var, num_vars: formula.num_vars() });
    }
    if a.len() != formula.num_vars() {
        return Err(FormulaError::LengthMismatch { expected: formula.num_vars(), found: a.len() }.into());
    }
    let value = a.get(var);
    let mut d = FlipDelta::default();
    for occ in formula.occurrences(var) {
        let others_true = formula
            .clause(occ.clause)
            .literals()
            .iter()
            .any(|l| l.var != var && l.eval(a.get(l.var)));
        if others_true {
            continue;
        }
        if value != occ.negated {
            d.brk += 1;
        } else {
            d.make += 1;
        }
    }
    Ok(d)
}

pub fn candidate_variables(formula: &CnfFormula, a: &Assignment) -> Result<Vec<usize>, FormulaError> {
    Ok(SearchState::new(formula, a.clone())?.candidates())
}

pub fn classify_state(formula: &CnfFormula, a: &Assignment) -> Result<StateClassification, FormulaError> {
    Ok(SearchState::new(formula, a.clone())?.classify())
}

/// Largest pattern `flip_table` will enumerate.
pub const FLIP_TABLE_MAX_VARS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRow {
    /// Variable `i` holds bit `i` of the row index.
    pub values: Vec<bool>,
    pub clause_truths: Vec<bool>,
    pub satisfying: bool,
    pub delta: FlipDelta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipTable {
    pub primary: usize,
    pub rows: Vec<FlipRow>,
}

/// Enumerates every assignment of a small pattern and the effect of flipping
/// `primary` from each of them.
pub fn flip_table(pattern: &CnfFormula, primary: usize) -> Result<FlipTable, FlipError> {
    let k = pattern.num_vars();
    if k > FLIP_TABLE_MAX_VARS {
        return Err(FlipError::TooManyVariables { max: FLIP_TABLE_MAX_VARS, found: k });
    }
    if primary >= k {
        return Err(FlipError::VarOutOfRange { var: primary, num_vars: k });
    }
    let rows = (0..1u64 << k)
        .map(|bits| {
            let a = Assignment::from_bits(bits, k);
            let clause_truths: Vec<bool> = pattern.clauses().iter().map(|c| c.is_satisfied(&a)).collect();
            let satisfying = clause_truths.iter().all(|&t| t);
            let delta = make_break(pattern, &a, primary).expect("checked above");
            FlipRow { values: a.values().to_vec(), clause_truths, satisfying, delta }
        })
        .collect();
    Ok(FlipTable { primary, rows })
}

impl fmt::Display for FlipTable {
    /// Layout: row number (`*` when the row satisfies every clause), variable
    /// bits, clause truth values, then the delta under `0→1` or `1→0`
    /// depending on the primary variable's current value. Satisfying rows have
    /// no delta, since the search never flips from them.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(first) = self.rows.first() else {
            return Ok(());
        };
        let k = first.values.len();
        let c = first.clause_truths.len();
        write!(f, "{:>5}", "row")?;
        for v in 0..k {
            write!(f, " {:>3}", format!("x{}", v + 1))?;
        }
        write!(f, " |")?;
        for ci in 0..c {
            write!(f, " {:>3}", format!("C{}", ci + 1))?;
        }
        writeln!(f, " | {:>4} {:>5} | {:>4} {:>4}", "make", "break", "0→1", "1→0")?;
        for (i, row) in self.rows.iter().enumerate() {
            let label = format!("{}{}", i + 1, if row.satisfying { "*" } else { "" });
            write!(f, "{label:>5}")?;
            for &b in &row.values {
                write!(f, " {:>3}", u8::from(b))?;
            }
            write!(f, " |")?;
            for &t in &row.clause_truths {
                write!(f, " {:>3}", u8::from(t))?;
            }
            write!(f, " | {:>4} {:>5} |", row.delta.make, row.delta.brk)?;
            let shown = if row.satisfying { String::new() } else { format_delta(row.delta.delta()) };
            if row.values[self.primary] {
                writeln!(f, " {:>4} {:>4}", "", shown)?;
            } else {
                writeln!(f, " {:>4} {:>4}", shown, "")?;
            }
        }
        Ok(())
    }
}

fn format_delta(d: i32) -> String {
    if d > 0 {
        format!("+{d}")
    } else {
        d.to_string()
    }
}

/// `(x ∨ a) ∧ (x ∨ ¬b) ∧ (¬x ∨ b)` over `x, a, b`: the cluster of a variable
/// with two source occurrences, with the rest of its source clause collapsed
/// into the single variable `a`.
pub fn two_occurrence_cluster() -> CnfFormula {
    let (x, a, b) = (0, 1, 2);
    pattern(3, &[&[Literal::pos(x), Literal::pos(a)], &[Literal::pos(x), Literal::neg(b)], &[Literal::neg(x), Literal::pos(b)]])
}

/// `(x ∨ y ∨ z) ∧ (x ∨ ¬b) ∧ (¬x ∨ b)` over `x, y, z, b`.
pub fn two_occurrence_cluster_expanded() -> CnfFormula {
    let (x, y, z, b) = (0, 1, 2, 3);
    pattern(
        4,
        &[
            &[Literal::pos(x), Literal::pos(y), Literal::pos(z)],
            &[Literal::pos(x), Literal::neg(b)],
            &[Literal::neg(x), Literal::pos(b)],
        ],
    )
}

/// `(x ∨ α ∨ β) ∧ (x ∨ ¬γ) ∧ (¬x ∨ θ)` over `x, α, β, γ, θ`: a clustered
/// variable with its source clause and both cycle clauses.
pub fn three_occurrence_cluster() -> CnfFormula {
    pattern(
        5,
        &[
            &[Literal::pos(0), Literal::pos(1), Literal::pos(2)],
            &[Literal::pos(0), Literal::neg(3)],
            &[Literal::neg(0), Literal::pos(4)],
        ],
    )
}

fn pattern(n: usize, clauses: &[&[Literal]]) -> CnfFormula {
    CnfFormula::new(n, clauses.iter().map(|c| c.to_vec().into()).collect()).expect("static pattern")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(bits: &[bool]) -> Assignment {
        Assignment::new(bits.to_vec())
    }

    #[test]
    fn make_break_on_two_occurrence_cluster() {
        let p = two_occurrence_cluster();
        // x, a, b
        let d = make_break(&p, &state(&[false, false, true]), 0).unwrap();
        assert_eq!((d.make, d.brk, d.delta()), (2, 0, 2));
        let d = make_break(&p, &state(&[true, true, false]), 0).unwrap();
        assert_eq!(d.delta(), 1);
        let d = make_break(&p, &state(&[false, false, false]), 0).unwrap();
        assert_eq!((d.make, d.brk, d.delta()), (1, 1, 0));
        assert!(matches!(make_break(&p, &state(&[false; 3]), 3), Err(FlipError::VarOutOfRange { .. })));
    }

    #[test]
    fn flip_classes() {
        assert_eq!(classify_flip(FlipDelta { make: 2, brk: 0 }), FlipClass::Positive);
        assert_eq!(classify_flip(FlipDelta { make: 1, brk: 1 }), FlipClass::Null);
        assert_eq!(classify_flip(FlipDelta { make: 0, brk: 1 }), FlipClass::Negative);
        assert!(FlipClass::Positive > FlipClass::Null && FlipClass::Null > FlipClass::Negative);
    }

    #[test]
    fn candidates_come_from_falsified_clauses() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2], &[-2, 3]]).unwrap();
        assert_eq!(candidate_variables(&f, &Assignment::all_false(3)).unwrap(), vec![0, 1]);
        assert!(candidate_variables(&f, &state(&[true, false, false])).unwrap().is_empty());
    }

    #[test]
    fn unit_clause_states() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let sc = classify_state(&f, &state(&[false])).unwrap();
        assert_eq!(sc.positive, vec![0]);
        assert_eq!(sc.kind, StateKind::Positive);
        let sc = classify_state(&f, &state(&[true])).unwrap();
        assert_eq!(sc.kind, StateKind::Solved);
        assert!(sc.positive.is_empty() && sc.null.is_empty() && sc.negative.is_empty());
    }

    #[test]
    fn incremental_flip_tracks_falsified_set() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1, 2], &[-2, -3], &[3]]).unwrap();
        let mut s = SearchState::new(&f, Assignment::all_false(3)).unwrap();
        for &v in &[0, 2, 1, 1, 0, 2, 2] {
            let before = s.num_satisfied() as i32;
            let d = s.make_break(v);
            s.flip(v);
            assert_eq!(s.num_satisfied() as i32 - before, d.delta());
            let mut got = s.unsat_clauses().to_vec();
            got.sort_unstable();
            assert_eq!(got, f.unsatisfied_clauses(s.assignment()).unwrap());
        }
    }

    #[test]
    fn flip_table_unit_clause() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let t = flip_table(&f, 0).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].delta.delta(), 1);
        assert!(!t.rows[0].satisfying);
        assert!(t.rows[1].satisfying);
    }

    #[test]
    fn flip_table_size_limit() {
        let f = CnfFormula::new(6, vec![]).unwrap();
        assert!(matches!(flip_table(&f, 0), Err(FlipError::TooManyVariables { found: 6, .. })));
        assert_eq!(flip_table(&three_occurrence_cluster(), 0).unwrap().rows.len(), 32);
    }

    #[test]
    fn display_marks_satisfying_rows() {
        let text = flip_table(&two_occurrence_cluster(), 0).unwrap().to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert!(lines[3].trim_start().starts_with("3*"));
        assert!(lines[5].trim_end().ends_with("+2"));
    }
}
