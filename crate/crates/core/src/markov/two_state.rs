//! The chain coarse-grained to two states, positive (`S₊`) and non-positive
//! (`S₋`), with transition matrix `P = [[1−a, a], [b, 1−b]]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chain::{StatePartition, StationaryDist, TransitionMatrix};
use super::MarkovError;

/// Closed-form quantities of the chain `[[1−a, a], [b, 1−b]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lumped2Chain {
    pub a: f64,
    pub b: f64,
    /// Invariant distribution `(b, a) / (a + b)`.
    pub w: [f64; 2],
    /// Matrix whose rows are both `w`.
    pub w_matrix: [[f64; 2]; 2],
    /// Fundamental matrix `(I − P + W)⁻¹`.
    pub z: [[f64; 2]; 2],
    /// `σ_j² = 2 w_j z_jj − w_j − w_j²`
    pub sigma_sq: [f64; 2],
}

impl Lumped2Chain {
    pub fn transition(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.a, self.a], [self.b, 1.0 - self.b]]
    }
}

pub fn two_state_quantities(a: f64, b: f64) -> Result<Lumped2Chain, MarkovError> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(MarkovError::InvalidProbabilities(format!("a = {a}, b = {b}")));
    }
    let s = a + b;
    if s == 0.0 {
        return Err(MarkovError::DegenerateChain);
    }
    let w = [b / s, a / s];
    let w_matrix = [w, w];
    let k = 1.0 / (s * s);
    let z = [
        [k * (b * b + a * b + a), k * (a * a + a * b - a)],
        [k * (b * b + a * b - b), k * (a * a + a * b + b)],
    ];
    let sigma_sq = [0, 1].map(|j| 2.0 * w[j] * z[j][j] - w[j] - w[j] * w[j]);
    Ok(Lumped2Chain { a, b, w, w_matrix, z, sigma_sq })
}

/// `σ² = ab (2 − a − b) / (a + b)³`, shared by both states.
pub fn sigma_sq_closed_form(a: f64, b: f64) -> f64 {
    a * b * (2.0 - a - b) / (a + b).powi(3)
}

/// The same variance written through `w₁ = b / (a + b)`.
pub fn sigma_sq_from_w1(a: f64, b: f64) -> f64 {
    let w1 = b / (a + b);
    w1 * (1.0 - w1) * (2.0 - a - b) / (a + b)
}

/// Lower bound on the expected per-step gain, `¾·w₁ − ¼`, from the per-class
/// bounds `f₁ ≥ ½` and `f₂ ≥ −¼` at `α = ¾`.
pub fn expected_gain_bound(w1: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&w1));
    0.75 * w1 - 0.25
}

/// Whether the positive class holds at least a fifth of the lumped mass.
pub fn eq6_holds(w1: f64) -> bool {
    w1 >= 0.2
}

/// Result of lumping a full chain onto `{S₊, S₋}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpedChain {
    /// Stationary mass of `S₊`.
    pub w_plus: f64,
    /// Stationary mass of `S₋`.
    pub w_minus: f64,
    /// Stationary mass outside the partition (model states).
    pub other_mass: f64,
    /// Rates of the raw one-step flows, `λ(S₊,S₋)` and `λ(S₋,S₊)` with `p_ij`
    /// taken straight from the full chain.
    pub a_direct: f64,
    pub b_direct: f64,
    /// The two-state chain built from the rates of the chain watched only
    /// while it is inside `S₊ ∪ S₋`. Equal to the direct rates when the
    /// partition covers every state.
    pub chain: Lumped2Chain,
}

impl LumpedChain {
    /// `|W₊·a − W₋·b|` on the watched chain.
    pub fn flow_imbalance(&self) -> f64 {
        (self.w_plus * self.chain.a - self.w_minus * self.chain.b).abs()
    }
}

const POS: usize = 0;
const NEG: usize = 1;
const OTHER: usize = 2;

/// Lumps `m` onto the positive and non-positive classes of `partition`.
///
/// The rate `λ(A,B)` is the stationary-weighted probability of a step from
/// `A` into `B`. States outside the partition (models) are handled by
/// watching the chain only while it is in `S₊ ∪ S₋`: an excursion through
/// the excluded states counts as one step to wherever it re-enters. The watched
/// chain keeps `w` restricted to the partition as its invariant law, so the
/// lumped invariant vector equals the aggregated masses exactly.
pub fn lump_two_state(
    m: &TransitionMatrix,
    w: &StationaryDist,
    partition: &StatePartition,
) -> Result<LumpedChain, MarkovError> {
    let size = m.size();
    let mut labels = vec![OTHER; size];
    for &s in &partition.positive {
        labels[s] = POS;
    }
    for &s in &partition.non_positive {
        if labels[s] == POS {
            return Err(MarkovError::InvalidArgument(format!("state {s} is in both classes")));
        }
        labels[s] = NEG;
    }
    let mut counts = [0usize; 3];
    labels.iter().for_each(|&l| counts[l] += 1);

    let w_plus: f64 = partition.positive.iter().map(|&s| w.w[s]).sum();
    let w_minus: f64 = partition.non_positive.iter().map(|&s| w.w[s]).sum();
    if w_plus <= 0.0 {
        return Err(MarkovError::EmptyClass("positive"));
    }
    if w_minus <= 0.0 {
        return Err(MarkovError::EmptyClass("non-positive"));
    }
    let other_mass = (1.0 - w_plus - w_minus).max(0.0);

    // re-entry probabilities from excluded states: h[k][c] = P(first state
    // in the partition reached from k lies in class c)
    let others: Vec<usize> = (0..size).filter(|&s| labels[s] == OTHER).collect();
    let reentry = reentry_probabilities(m, &labels, &counts, &others)?;
    let mut other_index = vec![usize::MAX; size];
    for (k, &s) in others.iter().enumerate() {
        other_index[s] = k;
    }

    let jump_into_others = [0, 1].map(|c| m.jump() / size as f64 * reentry.column(c).sum());

    let mut flow_direct = [0.0f64; 2];
    let mut flow_watched = [0.0f64; 2];
    for (from, states) in [(POS, &partition.positive), (NEG, &partition.non_positive)] {
        let to = 1 - from;
        for &i in states.iter() {
            let mass = m.mass_by_label(i, &labels, &counts);
            let mut via_others = 0.0;
            if !others.is_empty() {
                via_others += jump_into_others[to];
                for &(j, p) in m.moves(i) {
                    if labels[j] == OTHER {
                        via_others += (1.0 - m.jump()) * p * reentry[(other_index[j], to)];
                    }
                }
            }
            flow_direct[from] += w.w[i] * mass[to];
            flow_watched[from] += w.w[i] * (mass[to] + via_others);
        }
    }

    let a = flow_watched[POS] / w_plus;
    let b = flow_watched[NEG] / w_minus;
    Ok(LumpedChain {
        w_plus,
        w_minus,
        other_mass,
        a_direct: flow_direct[POS] / w_plus,
        b_direct: flow_direct[NEG] / w_minus,
        chain: two_state_quantities(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0))?,
    })
}

/// Solves `(I − P_OO) h = P_O,c 1` for both classes `c`.
fn reentry_probabilities(
    m: &TransitionMatrix,
    labels: &[usize],
    counts: &[usize; 3],
    others: &[usize],
) -> Result<DMatrix<f64>, MarkovError> {
    let k = others.len();
    if k == 0 {
        return Ok(DMatrix::zeros(0, 2));
    }
    if k > DIRECT_REENTRY_MAX {
        return reentry_by_iteration(m, labels, counts, others);
    }
    let mut index = vec![usize::MAX; m.size()];
    for (t, &s) in others.iter().enumerate() {
        index[s] = t;
    }
    let jump_each = m.jump() / m.size() as f64;
    let mut a = DMatrix::from_element(k, k, -jump_each);
    let mut rhs = DMatrix::zeros(k, 2);
    for (r, &s) in others.iter().enumerate() {
        a[(r, r)] += 1.0;
        for &(j, p) in m.moves(s) {
            if labels[j] == OTHER {
                a[(r, index[j])] -= (1.0 - m.jump()) * p;
            }
        }
        let mass = m.mass_by_label(s, labels, counts);
        rhs[(r, 0)] = mass[POS];
        rhs[(r, 1)] = mass[NEG];
    }
    a.lu().solve(&rhs).ok_or(MarkovError::Singular)
}

const DIRECT_REENTRY_MAX: usize = 4096;

/// Fixed-point iteration `h ← P_OO h + r` for large excluded sets.
fn reentry_by_iteration(
    m: &TransitionMatrix,
    labels: &[usize],
    counts: &[usize; 3],
    others: &[usize],
) -> Result<DMatrix<f64>, MarkovError> {
    const TOL: f64 = 1e-14;
    const MAX_ITER: usize = 1_000_000;
    let k = others.len();
    let mut index = vec![usize::MAX; m.size()];
    for (t, &s) in others.iter().enumerate() {
        index[s] = t;
    }
    let jump_each = m.jump() / m.size() as f64;
    let r: Vec<[f64; 3]> = others.iter().map(|&s| m.mass_by_label(s, labels, counts)).collect();
    let mut h = DMatrix::zeros(k, 2);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let sums = [h.column(0).sum(), h.column(1).sum()];
        let mut next = DMatrix::zeros(k, 2);
        for (t, &s) in others.iter().enumerate() {
            for c in 0..2 {
                let mut v = r[t][c] + jump_each * sums[c];
                for &(j, p) in m.moves(s) {
                    if labels[j] == OTHER {
                        v += (1.0 - m.jump()) * p * h[(index[j], c)];
                    }
                }
                next[(t, c)] = v;
            }
        }
        change = (&next - &h).amax();
        h = next;
        if change < TOL {
            return Ok(h);
        }
    }
    Err(MarkovError::NotConverged { iterations: MAX_ITER, residual: change })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inverse_2x2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
    }

    #[test]
    fn symmetric_chain_has_identity_fundamental_matrix() {
        let c = two_state_quantities(0.5, 0.5).unwrap();
        assert_eq!(c.w, [0.5, 0.5]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((c.z[i][j] - expect).abs() < 1e-15);
            }
        }
        assert!((c.sigma_sq[0] - 0.25).abs() < 1e-15);
        assert!((sigma_sq_closed_form(0.5, 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fundamental_matrix_matches_direct_inverse() {
        let c = two_state_quantities(0.3, 0.6).unwrap();
        let p = c.transition();
        let m = [[1.0 - p[0][0] + c.w[0], -p[0][1] + c.w[1]], [-p[1][0] + c.w[0], 1.0 - p[1][1] + c.w[1]]];
        let inv = inverse_2x2(m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - c.z[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert_eq!(two_state_quantities(0.0, 0.0), Err(MarkovError::DegenerateChain));
        assert!(matches!(two_state_quantities(1.2, 0.1), Err(MarkovError::InvalidProbabilities(_))));
        assert!(matches!(two_state_quantities(f64::NAN, 0.1), Err(MarkovError::InvalidProbabilities(_))));
    }

    #[test]
    fn expected_gain_values() {
        assert_eq!(expected_gain_bound(1.0), 0.5);
        assert_eq!(expected_gain_bound(0.5), 0.125);
        assert!(expected_gain_bound(1.0 / 3.0).abs() < 1e-16);
        assert!(eq6_holds(0.2) && !eq6_holds(0.19));
    }

    #[test]
    fn hand_built_four_state_lumping() {
        // states 0,1 positive; 2,3 non-positive
        let rows = vec![
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.5, 0.0, 0.2, 0.3],
            vec![0.0, 0.6, 0.3, 0.1],
        ];
        let m = TransitionMatrix::from_dense(&rows).unwrap();
        let w = super::super::stationary(&m, &Default::default()).unwrap();
        let part = StatePartition { positive: vec![0, 1], non_positive: vec![2, 3], solved: vec![] };
        let l = lump_two_state(&m, &w, &part).unwrap();
        let wp = w.w[0] + w.w[1];
        let wm = w.w[2] + w.w[3];
        let a = (w.w[0] * 0.7 + w.w[1] * 0.5) / wp;
        let b = (w.w[2] * 0.5 + w.w[3] * 0.6) / wm;
        assert!((l.chain.a - a).abs() < 1e-14 && (l.chain.b - b).abs() < 1e-14);
        assert_eq!(l.chain.a, l.a_direct);
        assert!((l.chain.w[0] - wp).abs() < 1e-10);
        assert!(l.flow_imbalance() < 1e-12);
    }

    #[test]
    fn empty_class_is_rejected() {
        let m = TransitionMatrix::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let w = super::super::stationary(&m, &Default::default()).unwrap();
        let part = StatePartition { positive: vec![0, 1], non_positive: vec![], solved: vec![] };
        assert_eq!(lump_two_state(&m, &w, &part), Err(MarkovError::EmptyClass("non-positive")));
    }
}
