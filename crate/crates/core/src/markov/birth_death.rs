use super::MarkovError;

/// Expected hitting times of state `m` for the chain on `{0, …, m}` that
/// steps up with `p_up`, stays with `p_stay` and is pushed from 0 to 1 with
/// certainty. Entry `i` of the result is the expected time from state `i`.
///
/// Backward substitution of `E_m = 0`, `E_i = 1 + p_up E_{i+1} + p_stay E_i`
/// for `i ≥ 1`, `E_0 = 1 + E_1`, with compensated summation so the error
/// stays at a few ulps for long chains.
pub fn birth_death_hit_times(m: usize, p_up: f64, p_stay: f64) -> Result<Vec<f64>, MarkovError> {
    if m < 1 {
        return Err(MarkovError::InvalidArgument("top state must be at least 1".into()));
    }
    let valid = |p: f64| (0.0..=1.0).contains(&p);
    if !valid(p_up) || !valid(p_stay) || p_up == 0.0 || (p_up + p_stay - 1.0).abs() > 1e-12 {
        return Err(MarkovError::InvalidProbabilities(format!("p_up = {p_up}, p_stay = {p_stay}")));
    }
    // E_i − E_{i+1} = 1 / (1 − p_stay), and 1 − p_stay = p_up
    let step = 1.0 / p_up;
    let mut times = vec![0.0; m + 1];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in (1..m).rev() {
        let t = sum + step;
        // Neumaier compensation
        comp += if sum.abs() >= step { (sum - t) + step } else { (step - t) + sum };
        sum = t;
        times[i] = sum + comp;
    }
    times[0] = 1.0 + times[1];
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_chains() {
        assert_eq!(birth_death_hit_times(1, 0.75, 0.25).unwrap(), vec![1.0, 0.0]);
        let t = birth_death_hit_times(2, 0.75, 0.25).unwrap();
        assert!((t[0] - 7.0 / 3.0).abs() < 1e-15);
        assert!((t[1] - 4.0 / 3.0).abs() < 1e-15);
        let t = birth_death_hit_times(100, 0.75, 0.25).unwrap();
        assert!((t[0] - 133.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(birth_death_hit_times(0, 0.75, 0.25).is_err());
        assert!(birth_death_hit_times(5, 0.7, 0.25).is_err());
        assert!(birth_death_hit_times(5, 0.0, 1.0).is_err());
        assert!(birth_death_hit_times(5, 1.2, -0.2).is_err());
    }
}
