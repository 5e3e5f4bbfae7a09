use serde::{Deserialize, Serialize};

use crate::C64;

/// Largest entrywise change between two estimate vectors.
pub fn max_change(now: &[C64], prev: &[C64]) -> f64 {
    debug_assert_eq!(now.len(), prev.len());
    now.iter()
        .zip(prev)
        .map(|(a, b)| (a - b).norm_sqr())
        .fold(0.0, |m: f64, d| if d > m || d.is_nan() { d } else { m })
        .sqrt()
}

/// `max_i |now_i − prev_i| < eps`.
pub fn check_convergence(now: &[C64], prev: &[C64], eps: f64) -> bool {
    max_change(now, prev) < eps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Converging,
    Oscillating,
    Undetermined,
}

/// Classifies the last `window` estimate vectors of `history` by their
/// step-to-step changes: strictly shrinking changes are converging, changes
/// that never contract while staying at or above `eps` are oscillating.
pub fn detect_nonexistence(history: &[Vec<C64>], window: usize, eps: f64) -> Trend {
    if window < 3 || history.len() < window {
        return Trend::Undetermined;
    }
    let tail = &history[history.len() - window..];
    let changes: Vec<f64> = tail.windows(2).map(|p| max_change(&p[1], &p[0])).collect();
    if changes.iter().any(|d| !d.is_finite()) {
        return Trend::Oscillating;
    }
    if changes.windows(2).all(|p| p[1] < p[0]) {
        Trend::Converging
    } else if changes.iter().all(|&d| d >= eps) {
        Trend::Oscillating
    } else {
        Trend::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_history(values: &[f64]) -> Vec<Vec<C64>> {
        values.iter().map(|&v| vec![C64::new(v, 0.0)]).collect()
    }

    #[test]
    fn identical_vectors_converge() {
        let v = vec![C64::new(0.9, 0.1); 4];
        assert!(check_convergence(&v, &v, 1e-300));
    }

    #[test]
    fn single_entry_off_by_two_micro() {
        let a = vec![C64::new(1.0, 0.0), C64::new(0.95, 0.0)];
        let mut b = a.clone();
        b[1] += 2e-6;
        assert!(!check_convergence(&a, &b, 1e-6));
    }

    #[test]
    fn geometric_contraction() {
        let mut v = 1.0;
        let mut values = vec![v];
        for k in 2..8 {
            v += 10f64.powi(-k);
            values.push(v);
        }
        assert_eq!(
            detect_nonexistence(&scalar_history(&values), 5, 1e-6),
            Trend::Converging
        );
    }

    #[test]
    fn alternating_estimates() {
        let values: Vec<f64> = (0..8).map(|k| if k % 2 == 0 { 0.1 } else { -0.1 }).collect();
        assert_eq!(
            detect_nonexistence(&scalar_history(&values), 5, 1e-6),
            Trend::Oscillating
        );
    }

    #[test]
    fn settled_but_noisy_is_undetermined() {
        let values = [1.0, 1.0 + 1e-9, 1.0, 1.0 + 1e-9, 1.0];
        assert_eq!(
            detect_nonexistence(&scalar_history(&values), 5, 1e-6),
            Trend::Undetermined
        );
    }
}
