use crate::netmodel::LoadModel;
use crate::sparse::CscMatrix;
use crate::C64;

/// Largest `|V_i (Y V)_i* − S_i(V_i)|` over PQ nodes, where `S_i` is the
/// scheduled injection of the constant-power and constant-current parts
/// (constant-impedance loads live in `y_full`). `v` includes the slack.
pub fn power_mismatch(y_full: &CscMatrix<C64>, loads: &LoadModel, v: &[C64]) -> f64 {
    let current = y_full.mul_vec(v);
    let mut worst: f64 = 0.0;
    for i in 1..v.len() {
        let calc = v[i] * current[i].conj();
        let r = (calc - loads.scheduled_injection(i - 1, v[i])).norm();
        if r.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_bus_exact_solution_has_tiny_residual() {
        // y (V1 - V0) = -conj(S / V1) with V0 = 1, y = 10, S = 0.1
        // real solution: 10 V^2 - 10 V + 0.1 = 0
        let v1 = (1.0 + (1.0f64 - 0.04).sqrt()) / 2.0;
        let y = C64::new(10.0, 0.0);
        let m = CscMatrix::from_triplets(2, 2, &[(0, 0, y), (1, 1, y), (0, 1, -y), (1, 0, -y)]);
        let loads = LoadModel {
            s_load: vec![C64::new(0.1, 0.0)],
            i_load: vec![C64::new(0.0, 0.0)],
            y_load: vec![C64::new(0.0, 0.0)],
            y_fixed: vec![C64::new(0.0, 0.0)],
        };
        let r = power_mismatch(&m, &loads, &[C64::new(1.0, 0.0), C64::new(v1, 0.0)]);
        assert!(r < 1e-14, "{r}");
        let off = power_mismatch(&m, &loads, &[C64::new(1.0, 0.0), C64::new(v1 + 1e-3, 0.0)]);
        assert!(off > 1e-3);
    }
}
