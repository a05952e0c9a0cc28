//! Reference implementations used as test oracles. They share no code with
//! the library beyond the formula data model.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use sparrow_core::CnfFormula;

/// Clauses as `(positive mask, negative mask)` over at most 32 variables.
pub fn masks(f: &CnfFormula) -> Vec<(u32, u32)> {
    assert!(f.num_vars() <= 32);
    f.clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u32, 0u32), |(p, n), l| {
                if l.negated {
                    (p, n | 1 << l.var)
                } else {
                    (p | 1 << l.var, n)
                }
            })
        })
        .collect()
}

pub fn count_sat(masks: &[(u32, u32)], bits: u32) -> usize {
    masks.iter().filter(|&&(p, n)| (bits & p) | (!bits & n) != 0).count()
}

pub fn brute_sat(f: &CnfFormula) -> bool {
    let n = f.num_vars();
    assert!(n <= 26, "brute force over {n} variables");
    let ms = masks(f);
    let all = ms.len();
    (0..1u64 << n).any(|b| count_sat(&ms, b as u32) == all)
}

/// Naive one-step law from `bits`: candidates are the variables of falsified
/// clauses, gains come from recounting satisfied clauses after each flip.
pub fn naive_law(ms: &[(u32, u32)], n: usize, alpha: f64, bits: u32) -> Vec<(u32, f64)> {
    let before = count_sat(ms, bits);
    if before == ms.len() {
        return vec![(bits, 1.0)];
    }
    let mut cand = 0u32;
    for &(p, q) in ms {
        if (bits & p) | (!bits & q) == 0 {
            cand |= p | q;
        }
    }
    // classes ordered best first: gain > 0, = 0, < 0
    let mut classes: [Vec<usize>; 3] = Default::default();
    for v in 0..n {
        if cand >> v & 1 == 1 {
            let gain = count_sat(ms, bits ^ (1 << v)) as i64 - before as i64;
            classes[if gain > 0 { 0 } else if gain == 0 { 1 } else { 2 }].push(v);
        }
    }
    let present: Vec<&Vec<usize>> = classes.iter().filter(|c| !c.is_empty()).collect();
    let mut law = Vec::new();
    if present.len() == 1 {
        for &v in present[0] {
            law.push((bits ^ (1 << v), 1.0 / present[0].len() as f64));
        }
    } else {
        for &v in present[0] {
            law.push((bits ^ (1 << v), alpha / present[0].len() as f64));
        }
        let rest: usize = present[1..].iter().map(|c| c.len()).sum();
        for c in &present[1..] {
            for &v in c.iter() {
                law.push((bits ^ (1 << v), (1.0 - alpha) / rest as f64));
            }
        }
    }
    law
}

/// Dense chain over all assignments mixed with a uniform jump.
pub fn naive_chain(f: &CnfFormula, alpha: f64, epsilon: f64) -> DMatrix<f64> {
    let n = f.num_vars();
    let ms = masks(f);
    let size = 1usize << n;
    let mut p = DMatrix::from_element(size, size, epsilon / size as f64);
    for s in 0..size {
        for (t, q) in naive_law(&ms, n, alpha, s as u32) {
            p[(s, t as usize)] += (1.0 - epsilon) * q;
        }
    }
    p
}

/// Power iteration from `start` until successive iterates agree to `tol`.
pub fn power_stationary(p: &DMatrix<f64>, start: &[f64], tol: f64) -> Vec<f64> {
    let mut w = nalgebra::RowDVector::from_row_slice(start);
    for _ in 0..10_000_000 {
        let next = &w * p;
        let diff = (&next - &w).abs().max();
        w = next;
        if diff < tol {
            break;
        }
    }
    let s = w.sum();
    w.iter().map(|x| x / s).collect()
}

/// Solves `w (I − P) = 0, Σ w = 1` by replacing one equation.
pub fn direct_stationary(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut a = DMatrix::<f64>::identity(n, n) - p.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let w = a.lu().solve(&rhs).expect("irreducible chain");
    w.iter().copied().collect()
}

/// Class states of a formula: `(positive, non_positive, models)`.
pub fn naive_partition(f: &CnfFormula) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = f.num_vars();
    let ms = masks(f);
    let (mut pos, mut neg, mut sol) = (vec![], vec![], vec![]);
    for s in 0..1u32 << n {
        let before = count_sat(&ms, s);
        if before == ms.len() {
            sol.push(s as usize);
            continue;
        }
        let mut cand = 0u32;
        for &(p, q) in &ms {
            if (s & p) | (!s & q) == 0 {
                cand |= p | q;
            }
        }
        let positive = (0..n).any(|v| cand >> v & 1 == 1 && count_sat(&ms, s ^ (1 << v)) > before);
        if positive { pos.push(s as usize) } else { neg.push(s as usize) }
    }
    (pos, neg, sol)
}

/// Rates of the two-class chain seen only while inside `pos ∪ neg`: the
/// dense censored kernel `P_AA + P_AO (I − P_OO)⁻¹ P_OA`, then mass-weighted
/// cross flows.
pub fn censored_rates(p: &DMatrix<f64>, w: &[f64], pos: &[usize], neg: &[usize]) -> (f64, f64) {
    let n = p.nrows();
    let inside: Vec<usize> = pos.iter().chain(neg).copied().collect();
    let mut is_in = vec![false; n];
    inside.iter().for_each(|&s| is_in[s] = true);
    let outside: Vec<usize> = (0..n).filter(|&s| !is_in[s]).collect();
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| p[(rows[i], cols[j])]);
    let mut kernel = pick(&inside, &inside);
    if !outside.is_empty() {
        let oo = DMatrix::<f64>::identity(outside.len(), outside.len()) - pick(&outside, &outside);
        let inv = oo.try_inverse().expect("excursions end");
        kernel += pick(&inside, &outside) * inv * pick(&outside, &inside);
    }
    let k = pos.len();
    let wp: f64 = pos.iter().map(|&s| w[s]).sum();
    let wn: f64 = neg.iter().map(|&s| w[s]).sum();
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..inside.len() {
        for j in 0..inside.len() {
            let flow = w[inside[i]] * kernel[(i, j)];
            if i < k && j >= k {
                a += flow;
            } else if i >= k && j < k {
                b += flow;
            }
        }
    }
    (a / wp, b / wn)
}

/// Random formula with clause widths 1 to 3 and distinct variables per clause.
pub fn random_mixed_formula<R: Rng>(rng: &mut R, n: usize, c: usize) -> CnfFormula {
    let mut clauses: Vec<Vec<i64>> = Vec::with_capacity(c);
    for _ in 0..c {
        let width = rng.random_range(1..=3.min(n));
        let mut vars: Vec<i64> = Vec::new();
        while vars.len() < width {
            let v = rng.random_range(1..=n as i64);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        clauses.push(vars.into_iter().map(|v| if rng.random::<bool>() { v } else { -v }).collect());
    }
    let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
    CnfFormula::from_dimacs_clauses(n, &refs).expect("valid by construction")
}

/// Complete DPLL search with unit propagation. Returns a model as bits per
/// variable, or `None` when the formula is unsatisfiable.
pub fn dpll(f: &CnfFormula) -> Option<Vec<bool>> {
    let clauses: Vec<Vec<(usize, bool)>> =
        f.clauses().iter().map(|c| c.literals().iter().map(|l| (l.var, !l.negated)).collect()).collect();
    let mut vals: Vec<Option<bool>> = vec![None; f.num_vars()];
    if search(&clauses, &mut vals) {
        Some(vals.into_iter().map(|v| v.unwrap_or(false)).collect())
    } else {
        None
    }
}

fn search(clauses: &[Vec<(usize, bool)>], vals: &mut Vec<Option<bool>>) -> bool {
    let saved = vals.clone();
    // unit propagation to a fixed point
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open = None;
            let mut n_open = 0;
            let mut sat = false;
            for &(v, want) in c {
                match vals[v] {
                    Some(x) if x == want => sat = true,
                    Some(_) => {}
                    None => {
                        n_open += 1;
                        open = Some((v, want));
                    }
                }
            }
            if sat {
                continue;
            }
            match (n_open, open) {
                (0, _) => {
                    *vals = saved;
                    return false;
                }
                (1, Some((v, want))) => {
                    vals[v] = Some(want);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let Some(v) = vals.iter().position(|x| x.is_none()) else {
        return true;
    };
    for choice in [true, false] {
        vals[v] = Some(choice);
        if search(clauses, vals) {
            return true;
        }
        vals[v] = None;
    }
    *vals = saved;
    false
}
