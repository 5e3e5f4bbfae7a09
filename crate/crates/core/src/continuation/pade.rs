use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// `P(x) / Q(x)` with `P = Σ ζ_i xⁱ` (degree `L`) and
/// `Q = 1 + Σ β_j xʲ` (degree `M`).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    pub numerator: Vec<C64>,
    /// `β_1 ..= β_M`; the constant term of the denominator is 1.
    pub denominator: Vec<C64>,
}

impl RationalApproximant {
    pub fn l(&self) -> usize {
        self.numerator.len() - 1
    }

    pub fn m(&self) -> usize {
        self.denominator.len()
    }

    pub fn evaluate(&self, x: C64) -> C64 {
        let horner = |c: &[C64], init: C64| c.iter().rev().fold(init, |acc, &a| acc * x + a);
        let p = horner(&self.numerator, C64::new(0.0, 0.0));
        let q = horner(&self.denominator, C64::new(0.0, 0.0)) * x + 1.0;
        p / q
    }

    /// First `n` Maclaurin coefficients of `P / Q`.
    pub fn maclaurin(&self, n: usize) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::with_capacity(n);
        for k in 0..n {
            let mut c = self.numerator.get(k).copied().unwrap_or_default();
            for (j, b) in self.denominator.iter().enumerate() {
                if j < k {
                    c -= b * out[k - j - 1];
                }
            }
            out.push(c);
        }
        out
    }
}

/// Condition estimates above this are reported as ill-conditioned.
const MAX_CONDITION: f64 = 1e13;

/// `[L/M]` Padé approximant by solving the Toeplitz system for the
/// denominator and back-substituting for the numerator.
pub fn pade_matrix_method(coeffs: &[C64], l: usize, m: usize) -> Result<RationalApproximant> {
    if coeffs.len() < l + m + 1 {
        return Err(Error::Precondition(format!(
            "[{l}/{m}] needs {} coefficients, got {}",
            l + m + 1,
            coeffs.len()
        )));
    }
    let c = |k: isize| -> C64 {
        if k < 0 {
            C64::new(0.0, 0.0)
        } else {
            coeffs[k as usize]
        }
    };
    let mut beta = Vec::new();
    if m > 0 {
        let mut a = DenseMatrix::zeros(m, m);
        let mut rhs = vec![C64::new(0.0, 0.0); m];
        for i in 1..=m {
            for j in 1..=m {
                a[(i - 1, j - 1)] = c((l + i) as isize - j as isize);
            }
            rhs[i - 1] = -c((l + i) as isize);
        }
        let lu = a.lu().map_err(|_| Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
        let condition = a.norm1() * lu.inverse().norm1();
        if !(condition.is_finite() && condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        beta = lu.solve(&rhs);
    }
    let numerator = (0..=l)
        .map(|i| {
            let mut z = coeffs[i];
            for (j, b) in beta.iter().enumerate() {
                z += b * c(i as isize - j as isize - 1);
            }
            z
        })
        .collect();
    Ok(RationalApproximant {
        numerator,
        denominator: beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn geometric_series_is_recovered() {
        let r = pade_matrix_method(&real(&[1.0, 1.0, 1.0]), 1, 1).unwrap();
        assert!((r.numerator[0] - 1.0).norm() < 1e-14);
        assert!(r.numerator[1].norm() < 1e-14);
        assert!((r.denominator[0] + 1.0).norm() < 1e-14);
    }

    #[test]
    fn exponential_two_two() {
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
        let coeffs: Vec<f64> = fact.iter().map(|f| 1.0 / f).collect();
        let r = pade_matrix_method(&real(&coeffs), 2, 2).unwrap();
        let e = r.evaluate(C64::new(1.0, 0.0));
        assert!((e - std::f64::consts::E).norm() < 5e-3, "{e}");
    }

    #[test]
    fn too_few_coefficients() {
        assert!(matches!(
            pade_matrix_method(&real(&[1.0, 1.0]), 1, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn singular_toeplitz_system() {
        let r = pade_matrix_method(&real(&[1.0, 0.0, 0.0]), 1, 1);
        assert!(matches!(r, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn m_zero_is_the_truncated_series() {
        let coeffs = real(&[1.0, 2.0, 3.0]);
        let r = pade_matrix_method(&coeffs, 2, 0).unwrap();
        assert_eq!(r.numerator, coeffs);
        assert_eq!(r.evaluate(C64::new(1.0, 0.0)), C64::new(6.0, 0.0));
    }
}
