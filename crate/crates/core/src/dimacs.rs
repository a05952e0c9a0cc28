//! DIMACS CNF reading and writing.
//!
//! Accepts `c` comment lines, a single `p cnf <vars> <clauses>` header and
//! zero-terminated clauses that may span lines. Both `\n` and `\r\n` line
//! endings are accepted; output always uses `\n`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Clause, CnfFormula, Literal, MAX_CLAUSE_WIDTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: second `p` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: unexpected token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("header announces {expected} clauses, found {found}")]
    ClauseCountMismatch { expected: usize, found: usize },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    VarOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: clause contains both polarities of variable {var}")]
    TautologicalClause { line: usize, var: usize },
    #[error("line {line}: duplicate literal {literal}")]
    DuplicateLiteral { line: usize, literal: i64 },
    #[error("line {line}: clause wider than {MAX_CLAUSE_WIDTH} literals")]
    ClauseTooWide { line: usize },
    #[error("input ends inside a clause (missing terminating 0)")]
    UnterminatedClause,
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        // SATLIB end-of-data marker
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line: line_no });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::MissingHeader);
        };
        for token in line.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| DimacsError::InvalidToken { line: line_no, token: token.to_string() })?;
            if current.is_empty() {
                current_line = line_no;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause { line: line_no });
                }
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            let var = lit.unsigned_abs() as usize;
            if var > num_vars {
                return Err(DimacsError::VarOutOfRange { line: line_no, literal: lit, num_vars });
            }
            let lit = Literal { var: var - 1, negated: lit < 0 };
            if let Some(other) = current.iter().find(|l| l.var == lit.var) {
                return Err(if other.negated == lit.negated {
                    DimacsError::DuplicateLiteral { line: line_no, literal: lit.to_dimacs() }
                } else {
                    DimacsError::TautologicalClause { line: line_no, var }
                });
            }
            if current.len() == MAX_CLAUSE_WIDTH {
                return Err(DimacsError::ClauseTooWide { line: current_line });
            }
            current.push(lit);
        }
    }

    let (num_vars, expected) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if clauses.len() != expected {
        return Err(DimacsError::ClauseCountMismatch { expected, found: clauses.len() });
    }
    Ok(CnfFormula::new(num_vars, clauses).expect("clauses are validated while parsing"))
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), DimacsError> {
    let malformed = || DimacsError::MalformedHeader { line: line_no, text: line.to_string() };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("p") || parts.next() != Some("cnf") {
        return Err(malformed());
    }
    let vars = parts.next().and_then(|s| s.parse().ok()).ok_or_else(malformed)?;
    let clauses = parts.next().and_then(|s| s.parse().ok()).ok_or_else(malformed)?;
    if parts.next().is_some() {
        return Err(malformed());
    }
    Ok((vars, clauses))
}

/// Canonical DIMACS text: header, then one clause per line.
pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses()).unwrap();
    for clause in formula.clauses() {
        for lit in clause.literals() {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_file() {
        let f = parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 2 0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.num_clauses(), 2);
        assert_eq!(f.clause(0).literals(), &[Literal::pos(0), Literal::neg(1), Literal::pos(2)]);
        assert_eq!(f.clause(1).literals(), &[Literal::neg(0), Literal::pos(1)]);
    }

    #[test]
    fn skips_comments_and_handles_crlf() {
        let f = parse_dimacs("c note\np cnf 1 1\n1 0\n").unwrap();
        assert_eq!((f.num_vars(), f.num_clauses()), (1, 1));
        let g = parse_dimacs("c note\r\np cnf 1 1\r\n1 0\r\n").unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn clause_may_span_lines() {
        let f = parse_dimacs("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(f.clause(0).len(), 3);
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse_dimacs("p cnf 1 1\n0\n"), Err(DimacsError::EmptyClause { line: 2 }));
        assert_eq!(parse_dimacs("1 0\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs(""), Err(DimacsError::MissingHeader));
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 0\n"),
            Err(DimacsError::ClauseCountMismatch { expected: 2, found: 1 })
        );
        assert!(matches!(parse_dimacs("p cnf 2 1\n3 0\n"), Err(DimacsError::VarOutOfRange { literal: 3, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 -1 0\n"), Err(DimacsError::TautologicalClause { var: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n2 2 0\n"), Err(DimacsError::DuplicateLiteral { .. })));
        assert!(matches!(parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"), Err(DimacsError::ClauseTooWide { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 x 0\n"), Err(DimacsError::InvalidToken { .. })));
        assert!(matches!(parse_dimacs("p cnf 2\n"), Err(DimacsError::MalformedHeader { .. })));
        assert_eq!(parse_dimacs("p cnf 2 1\n1 2\n"), Err(DimacsError::UnterminatedClause));
    }

    #[test]
    fn emits_canonical_form() {
        let f = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(emit_dimacs(&f), "p cnf 1 1\n1 0\n");
        let empty = CnfFormula::new(2, vec![]).unwrap();
        assert_eq!(emit_dimacs(&empty), "p cnf 2 0\n");
        let g = parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 2 0\n").unwrap();
        assert_eq!(parse_dimacs(&emit_dimacs(&g)).unwrap(), g);
    }
}
