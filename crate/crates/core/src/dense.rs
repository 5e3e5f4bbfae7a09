//! Small row-major dense complex matrices.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![Complex64::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "ragged rows");
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch");
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.ncols)
            .map(|j| (0..self.nrows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU with partial pivoting; fails on an exactly zero pivot.
    pub fn lu(&self) -> Result<DenseLu> {
        assert_eq!(self.nrows, self.ncols, "LU needs a square matrix");
        let n = self.nrows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, mag) =
                (k..n)
                    .map(|i| (i, a[(i, k)].norm()))
                    .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if mag == 0.0 {
                return Err(Error::SingularSystem(format!("zero pivot at column {k}")));
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Ok(DenseLu { lu: a, perm })
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        Ok(self.lu()?.inverse())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.ncols + j]
    }
}

#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.nrows;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.lu.nrows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![Complex64::zero(); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = Complex64::zero();
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let c = Complex64::new;
        let m = DenseMatrix::from_rows(&[vec![c(0.0, 1.0), c(2.0, 0.0)], vec![c(3.0, -1.0), c(1.0, 1.0)]]);
        let inv = m.inverse().unwrap();
        assert!(m.matmul(&inv).max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_matrix_fails() {
        let c = |r| Complex64::new(r, 0.0);
        let m = DenseMatrix::from_rows(&[vec![c(1.0), c(2.0)], vec![c(2.0), c(4.0)]]);
        assert!(m.lu().is_err());
    }
}
