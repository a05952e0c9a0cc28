use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{StationaryDist, TransitionMatrix};
use super::MarkovError;
use crate::rng::{derive_seed, rng_from_seed};

fn step<R: Rng + ?Sized>(m: &TransitionMatrix, state: usize, rng: &mut R) -> usize {
    if m.jump() > 0.0 && rng.random::<f64>() < m.jump() {
        return rng.random_range(0..m.size());
    }
    let row = m.moves(state);
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for &(j, p) in row {
        acc += p;
        if u < acc {
            return j;
        }
    }
    // u landed in the round-off gap at the top of the row
    row.last().map_or(state, |&(j, _)| j)
}

/// Visit counts of every state over `X_0, …, X_{n−1}` starting at `start`.
pub fn simulate_visits<R: Rng + ?Sized>(m: &TransitionMatrix, start: usize, n: u64, rng: &mut R) -> Vec<u64> {
    let mut visits = vec![0u64; m.size()];
    let mut state = start;
    for _ in 0..n {
        visits[state] += 1;
        state = step(m, state, rng);
    }
    visits
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitStats {
    pub state: usize,
    pub n: u64,
    pub visits: u64,
    pub frac: f64,
    /// `(V_j(n) − n w_j) / sqrt(n σ_j²)`
    pub standardized: f64,
}

/// Simulates `runs` independent trajectories of length `n`, each from a
/// uniformly random start, and reports the visit statistics of state `j`.
/// Run `r` draws from the stream `derive_seed(seed, &[r])`.
pub fn visit_count_stats(
    m: &TransitionMatrix,
    w: &StationaryDist,
    sigma_sq: &[f64],
    j: usize,
    n: u64,
    runs: usize,
    seed: u64,
) -> Result<Vec<VisitStats>, MarkovError> {
    if j >= m.size() || w.w.len() != m.size() || sigma_sq.len() != m.size() {
        return Err(MarkovError::InvalidArgument("state index or vector length out of range".into()));
    }
    if n == 0 {
        return Err(MarkovError::InvalidArgument("n must be positive".into()));
    }
    let (wj, var) = (w.w[j], sigma_sq[j]);
    Ok((0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, &[r as u64]));
            let start = rng.random_range(0..m.size());
            let visits = simulate_visits(m, start, n, &mut rng)[j];
            let nf = n as f64;
            VisitStats {
                state: j,
                n,
                visits,
                frac: visits as f64 / nf,
                standardized: (visits as f64 - nf * wj) / (nf * var).sqrt(),
            }
        })
        .collect())
}
