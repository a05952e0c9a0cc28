use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MarkovError;
use crate::flip::{SearchState, StateKind};
use crate::formula::{Assignment, CnfFormula};
use crate::solver::flip_law;

/// Size caps for the dense computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLimits {
    /// Largest variable count [`build_chain`] accepts.
    pub max_vars: usize,
    /// Largest chain for which the full fundamental matrix is inverted.
    pub max_fundamental_states: usize,
}

impl Default for ChainLimits {
    fn default() -> Self {
        ChainLimits { max_vars: 16, max_fundamental_states: 1024 }
    }
}

/// Row-stochastic matrix stored as `jump · U + (1 - jump) · K`, where `U` is
/// the uniform matrix and `K` a sparse stochastic matrix of ordinary moves.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    jump: f64,
    moves: Vec<Vec<(usize, f64)>>,
}

const ROW_SUM_TOL: f64 = 1e-12;

impl TransitionMatrix {
    pub fn new(jump: f64, moves: Vec<Vec<(usize, f64)>>) -> Result<Self, MarkovError> {
        if !(0.0..=1.0).contains(&jump) {
            return Err(MarkovError::InvalidProbabilities(format!("jump probability {jump}")));
        }
        let size = moves.len();
        for (i, row) in moves.iter().enumerate() {
            let mut sum = 0.0;
            for &(j, p) in row {
                if j >= size || !(p >= 0.0) {
                    return Err(MarkovError::InvalidProbabilities(format!("row {i} entry ({j}, {p})")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(MarkovError::InvalidProbabilities(format!("row {i} sums to {sum}")));
            }
        }
        Ok(TransitionMatrix { size, jump, moves })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        let size = rows.len();
        let moves = rows
            .iter()
            .map(|r| {
                if r.len() != size {
                    return Err(MarkovError::InvalidArgument("matrix is not square".into()));
                }
                Ok(r.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(j, &p)| (j, p)).collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        TransitionMatrix::new(0.0, moves)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn jump(&self) -> f64 {
        self.jump
    }

    pub fn moves(&self, i: usize) -> &[(usize, f64)] {
        &self.moves[i]
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        let k: f64 = self.moves[i].iter().filter(|&&(t, _)| t == j).map(|&(_, p)| p).sum();
        self.jump / self.size as f64 + (1.0 - self.jump) * k
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![self.jump / self.size as f64; self.size];
        for &(j, p) in &self.moves[i] {
            row[j] += (1.0 - self.jump) * p;
        }
        row
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_element(self.size, self.size, self.jump / self.size as f64);
        for (i, row) in self.moves.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] += (1.0 - self.jump) * p;
            }
        }
        m
    }

    /// `w · M`.
    pub fn left_mul(&self, w: &[f64]) -> Vec<f64> {
        let total: f64 = w.iter().sum();
        let mut out = vec![self.jump / self.size as f64 * total; self.size];
        for (i, row) in self.moves.iter().enumerate() {
            let wi = (1.0 - self.jump) * w[i];
            if wi == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += wi * p;
            }
        }
        out
    }

    /// Probability mass row `i` puts on each label, for a labelling of states
    /// into `L` groups.
    pub(crate) fn mass_by_label<const L: usize>(&self, i: usize, labels: &[usize], counts: &[usize; L]) -> [f64; L] {
        let mut out = [0.0; L];
        for (l, o) in out.iter_mut().enumerate() {
            *o = self.jump * counts[l] as f64 / self.size as f64;
        }
        for &(j, p) in &self.moves[i] {
            out[labels[j]] += (1.0 - self.jump) * p;
        }
        out
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.size)
            .map(|i| (self.dense_row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_irreducible(&self) -> bool {
        if self.size == 0 {
            return false;
        }
        if self.jump > 0.0 {
            return true;
        }
        let mut reverse = vec![Vec::new(); self.size];
        for (i, row) in self.moves.iter().enumerate() {
            for &(j, p) in row {
                if p > 0.0 {
                    reverse[j].push(i);
                }
            }
        }
        let forward: Vec<Vec<usize>> =
            self.moves.iter().map(|r| r.iter().filter(|e| e.1 > 0.0).map(|e| e.0).collect()).collect();
        reaches_all(&forward) && reaches_all(&reverse)
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// The exact one-step law of the search from every assignment of `formula`.
///
/// Non-model states move per the flip-selection law. Model states, where the
/// search would stop, loop on themselves. With `epsilon > 0` every row is
/// mixed with a uniform jump.
pub fn build_chain(
    formula: &CnfFormula,
    alpha: f64,
    epsilon: f64,
    limits: &ChainLimits,
) -> Result<TransitionMatrix, MarkovError> {
    let n = formula.num_vars();
    if n > limits.max_vars {
        return Err(MarkovError::TooManyVariables { max: limits.max_vars, found: n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MarkovError::InvalidProbabilities(format!("alpha {alpha}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(MarkovError::InvalidProbabilities(format!("epsilon {epsilon}")));
    }
    let moves = (0..1u64 << n)
        .into_par_iter()
        .map(|s| {
            let state = SearchState::new(formula, Assignment::from_bits(s, n)).expect("sized to formula");
            if state.is_model() {
                return vec![(s as usize, 1.0)];
            }
            flip_law(&state.classify(), alpha).into_iter().map(|(v, p)| ((s ^ (1 << v)) as usize, p)).collect()
        })
        .collect();
    TransitionMatrix::new(epsilon, moves)
}

/// States grouped by the kind of search position they represent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePartition {
    pub positive: Vec<usize>,
    pub non_positive: Vec<usize>,
    pub solved: Vec<usize>,
}

pub fn partition_states(formula: &CnfFormula, limits: &ChainLimits) -> Result<StatePartition, MarkovError> {
    let n = formula.num_vars();
    if n > limits.max_vars {
        return Err(MarkovError::TooManyVariables { max: limits.max_vars, found: n });
    }
    let kinds: Vec<StateKind> = (0..1u64 << n)
        .into_par_iter()
        .map(|s| SearchState::new(formula, Assignment::from_bits(s, n)).expect("sized").classify().kind)
        .collect();
    let mut p = StatePartition { positive: vec![], non_positive: vec![], solved: vec![] };
    for (s, kind) in kinds.into_iter().enumerate() {
        match kind {
            StateKind::Positive => p.positive.push(s),
            StateKind::NonPositive => p.non_positive.push(s),
            StateKind::Solved => p.solved.push(s),
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    /// Chains up to this size are solved directly.
    pub direct_max_states: usize,
    pub power_tol: f64,
    pub power_max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions { direct_max_states: 4096, power_tol: 1e-12, power_max_iter: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDist {
    pub w: Vec<f64>,
    /// `‖wM − w‖∞`
    pub residual: f64,
}

pub fn stationary(m: &TransitionMatrix, opts: &StationaryOptions) -> Result<StationaryDist, MarkovError> {
    if !m.is_irreducible() {
        return Err(MarkovError::EpsilonRequired);
    }
    let w = if m.size() <= opts.direct_max_states { direct_stationary(m)? } else { power_stationary(m, opts)? };
    let residual = residual(m, &w);
    Ok(StationaryDist { w, residual })
}

fn residual(m: &TransitionMatrix, w: &[f64]) -> f64 {
    m.left_mul(w).iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Solves `(Mᵀ − I) w = 0` with the last equation replaced by `Σ w = 1`.
fn direct_stationary(m: &TransitionMatrix) -> Result<Vec<f64>, MarkovError> {
    let s = m.size();
    let mut a = m.to_dense().transpose();
    for i in 0..s {
        a[(i, i)] -= 1.0;
    }
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(s);
    rhs[s - 1] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or(MarkovError::Singular)?;
    Ok(normalize(sol.iter().copied().collect()))
}

fn power_stationary(m: &TransitionMatrix, opts: &StationaryOptions) -> Result<Vec<f64>, MarkovError> {
    let s = m.size();
    let mut w = vec![1.0 / s as f64; s];
    let mut change = f64::INFINITY;
    for _ in 0..opts.power_max_iter {
        let next = normalize(m.left_mul(&w));
        change = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if change < opts.power_tol {
            return Ok(w);
        }
    }
    Err(MarkovError::NotConverged { iterations: opts.power_max_iter, residual: change })
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    // round-off can leave tiny negative entries
    for x in w.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// `Z = (I − P + W)⁻¹` for the full chain.
pub fn fundamental_matrix(
    m: &TransitionMatrix,
    w: &StationaryDist,
    limits: &ChainLimits,
) -> Result<DMatrix<f64>, MarkovError> {
    let s = m.size();
    if s > limits.max_fundamental_states {
        return Err(MarkovError::TooManyStates { max: limits.max_fundamental_states, found: s });
    }
    let mut a = -m.to_dense();
    for i in 0..s {
        a[(i, i)] += 1.0;
        for j in 0..s {
            a[(i, j)] += w.w[j];
        }
    }
    a.try_inverse().ok_or(MarkovError::Singular)
}

/// Asymptotic visit-count variances `σ_j² = 2 w_j z_jj − w_j − w_j²`.
pub fn clt_variances(z: &DMatrix<f64>, w: &StationaryDist) -> Vec<f64> {
    w.w.iter().enumerate().map(|(j, &wj)| 2.0 * wj * z[(j, j)] - wj - wj * wj).collect()
}
