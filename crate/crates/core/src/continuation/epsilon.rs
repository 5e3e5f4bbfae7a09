use crate::C64;

/// Wynn's epsilon table over the partial sums of one series, kept one
/// anti-diagonal at a time.
///
/// Even columns `ε_{2j}` of the table are Padé approximants of the partial
/// sums, so the last even entry of each new anti-diagonal is the diagonal
/// (or one-above-diagonal) approximant at `α = 1`.
#[derive(Debug, Clone)]
pub struct EpsilonTable {
    sum: C64,
    /// `None` marks an entry whose defining difference vanished.
    diagonal: Vec<Option<C64>>,
    next: Vec<Option<C64>>,
    estimate: C64,
    previous: C64,
    terms: usize,
}

const DEGENERATE: f64 = 1e-13;

#[inline]
fn reciprocal_difference(a: Option<C64>, b: Option<C64>) -> C64 {
    match (a, b) {
        (Some(a), Some(b)) => {
            let d = a - b;
            let scale = DEGENERATE * (1.0 + a.norm_sqr().max(b.norm_sqr()).sqrt());
            if d.norm_sqr() < scale * scale {
                C64::new(f64::INFINITY, 0.0)
            } else {
                d.inv()
            }
        }
        _ => C64::new(0.0, 0.0),
    }
}

impl EpsilonTable {
    pub fn new() -> Self {
        EpsilonTable {
            sum: C64::new(0.0, 0.0),
            diagonal: Vec::new(),
            next: Vec::new(),
            estimate: C64::new(0.0, 0.0),
            previous: C64::new(0.0, 0.0),
            terms: 0,
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut t = Self::new();
        t.diagonal.reserve(n);
        t.next.reserve(n);
        t
    }

    /// Number of coefficients consumed.
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn partial_sum(&self) -> C64 {
        self.sum
    }

    pub fn estimate(&self) -> C64 {
        self.estimate
    }

    pub fn previous_estimate(&self) -> C64 {
        self.previous
    }

    /// Consumes the next series coefficient and returns the updated estimate.
    pub fn push(&mut self, coefficient: C64) -> C64 {
        self.sum += coefficient;
        let m = self.terms;
        self.terms += 1;
        self.next.clear();
        self.next.push(Some(self.sum));
        for k in 1..=m {
            let inv = reciprocal_difference(self.next[k - 1], self.diagonal[k - 1]);
            let base = if k >= 2 {
                self.diagonal[k - 2]
            } else {
                Some(C64::new(0.0, 0.0))
            };
            let entry = match base {
                Some(b) if inv.is_finite() => {
                    let e = b + inv;
                    e.is_finite().then_some(e)
                }
                _ => None,
            };
            self.next.push(entry);
        }
        std::mem::swap(&mut self.diagonal, &mut self.next);
        self.previous = self.estimate;
        self.estimate = match self.diagonal[2 * (m / 2)] {
            Some(e) => e,
            None if m == 0 => self.sum,
            None => self.previous,
        };
        self.estimate
    }
}

impl Default for EpsilonTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-node acceleration tables for a whole voltage vector.
#[derive(Debug, Clone)]
pub struct AccelState {
    tables: Vec<EpsilonTable>,
    estimates: Vec<C64>,
    previous: Vec<C64>,
}

impl AccelState {
    pub fn new(n_nodes: usize, max_terms: usize) -> Self {
        AccelState {
            tables: (0..n_nodes)
                .map(|_| EpsilonTable::with_capacity(max_terms + 1))
                .collect(),
            estimates: vec![C64::new(0.0, 0.0); n_nodes],
            previous: vec![C64::new(0.0, 0.0); n_nodes],
        }
    }

    /// Feeds one coefficient per node and returns the new estimates.
    pub fn accel_update(&mut self, coefficients: &[C64]) -> &[C64] {
        std::mem::swap(&mut self.estimates, &mut self.previous);
        for ((t, e), &c) in self.tables.iter_mut().zip(&mut self.estimates).zip(coefficients) {
            *e = t.push(c);
        }
        &self.estimates
    }

    pub fn estimates(&self) -> &[C64] {
        &self.estimates
    }

    pub fn previous_estimates(&self) -> &[C64] {
        &self.previous
    }

    pub fn table(&self, node: usize) -> &EpsilonTable {
        &self.tables[node]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(coeffs: &[f64]) -> C64 {
        let mut t = EpsilonTable::new();
        let mut e = C64::new(0.0, 0.0);
        for &c in coeffs {
            e = t.push(C64::new(c, 0.0));
        }
        e
    }

    #[test]
    fn geometric_series_is_exact() {
        let coeffs: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
        assert!((run(&coeffs) - 2.0).norm() < 1e-12);
    }

    #[test]
    fn log_two_from_eight_terms() {
        // ln(1 + x) through x^8: the zero constant term and eight nonzero terms
        let mut coeffs = vec![0.0];
        coeffs.extend((1..=8).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64));
        assert!((run(&coeffs) - std::f64::consts::LN_2).norm() < 1e-6);
    }

    #[test]
    fn zero_tail_keeps_the_germ() {
        let mut t = EpsilonTable::new();
        let germ = C64::new(1.02, -0.01);
        assert_eq!(t.push(germ), germ);
        for _ in 0..12 {
            assert_eq!(t.push(C64::new(0.0, 0.0)), germ);
        }
    }

    #[test]
    fn divergent_geometric_series_is_summed_analytically() {
        // 1 + 2 + 4 + ... is the expansion of 1/(1-2x); at x = 1 that is -1
        let coeffs: Vec<f64> = (0..5).map(|k| 2f64.powi(k)).collect();
        assert!((run(&coeffs) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn vector_state_tracks_each_node() {
        let mut a = AccelState::new(2, 8);
        a.accel_update(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let e = a.accel_update(&[C64::new(0.5, 0.0), C64::new(0.0, 0.0)]).to_vec();
        assert_eq!(e, vec![C64::new(1.5, 0.0), C64::new(2.0, 0.0)]);
        assert_eq!(a.previous_estimates()[0], C64::new(1.0, 0.0));
    }
}
