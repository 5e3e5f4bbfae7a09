//! Compressed-column sparse matrices and a left-looking sparse LU.
//!
//! The factorization follows the Gilbert–Peierls scheme: every column is
//! obtained from a sparse triangular solve against the columns of `L`
//! computed so far, with the nonzero pattern found by a depth-first reach.
//! Columns are pre-ordered by minimum degree on the symmetrized pattern, and
//! pivots are chosen by threshold partial pivoting that prefers the diagonal.

use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Field element usable by the sparse kernels (`f64` and `Complex64`).
pub trait Scalar:
    Copy
    + Zero
    + One
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + std::fmt::Debug
{
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

thread_local! {
    static FACTORIZATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of numeric LU factorizations performed on this thread so far.
///
/// The benchmark harness reads this before and after a timed region to prove
/// that preparation work stays outside of it.
pub fn factorization_count() -> u64 {
    FACTORIZATIONS.with(|c| c.get())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CscMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); ncols];
        for &(r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            cols[c].push((r, v));
        }
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        for mut col in cols {
            col.sort_by_key(|&(r, _)| r);
            for (r, v) in col {
                match row_idx.last() {
                    Some(&last) if last == r && row_idx.len() > *col_ptr.last().unwrap() => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        row_idx.push(r);
                        values.push(v);
                    }
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of column `j` as `(row, value)` pairs in increasing row order.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.column(j)
            .find(|&(r, _)| r == i)
            .map_or(T::zero(), |(_, v)| v)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                out[i][j] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                t.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::zero(); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut row_map = vec![usize::MAX; self.nrows];
        for (new, &old) in rows.iter().enumerate() {
            row_map[old] = new;
        }
        let mut t = Vec::new();
        for (jn, &j) in cols.iter().enumerate() {
            for (i, v) in self.column(j) {
                if row_map[i] != usize::MAX {
                    t.push((row_map[i], jn, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut t = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                t.push((i, j, v));
            }
        }
        t
    }
}

/// Minimum-degree elimination order of the pattern of `A + Aᵀ`.
///
/// Ties are broken by the lower index so the order is deterministic. For
/// tree-structured matrices this eliminates leaves first and produces no fill.
pub fn minimum_degree_order<T: Scalar>(a: &CscMatrix<T>) -> Vec<usize> {
    let n = a.ncols();
    assert_eq!(a.nrows(), n, "ordering needs a square matrix");
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 0..n {
        for (i, _) in a.column(j) {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|v| Reverse((adj[v].len(), v))).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            adj[u].remove(&v);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        for &u in &nbrs {
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    order
}

/// Sparse LU factors `P A Q = L U` with unit-diagonal `L`.
#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    /// row permutation: original row -> pivot position
    pinv: Vec<usize>,
    /// column order: pivot position -> original column
    q: Vec<usize>,
    l: CscMatrix<T>,
    /// strictly upper part of `U`
    u: CscMatrix<T>,
    u_diag_inv: Vec<T>,
}

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_RELATIVE: f64 = 1e-12;

impl<T: Scalar> SparseLu<T> {
    /// Factors `a` using a minimum-degree column order.
    pub fn factor(a: &CscMatrix<T>) -> Result<Self> {
        let q = minimum_degree_order(a);
        Self::factor_with_order(a, &q)
    }

    /// Factors `a` using the supplied column order (reusable across refactorizations
    /// of matrices that share a pattern).
    pub fn factor_with_order(a: &CscMatrix<T>, q: &[usize]) -> Result<Self> {
        FACTORIZATIONS.with(|c| c.set(c.get() + 1));
        let n = a.ncols();
        if a.nrows() != n {
            return Err(Error::Precondition(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                n
            )));
        }
        assert_eq!(q.len(), n);
        let scale = a.max_abs();
        if n > 0 && scale == 0.0 {
            return Err(Error::SingularSystem("matrix is identically zero".into()));
        }
        let tiny = SINGULAR_RELATIVE * scale;

        let none = usize::MAX;
        let mut pinv = vec![none; n];
        // L columns with original row indices, remapped at the end.
        let mut l_ptr = vec![0usize];
        let mut l_rows: Vec<usize> = Vec::with_capacity(2 * a.nnz());
        let mut l_vals: Vec<T> = Vec::with_capacity(2 * a.nnz());
        let mut u_ptr = vec![0usize];
        let mut u_rows: Vec<usize> = Vec::with_capacity(2 * a.nnz());
        let mut u_vals: Vec<T> = Vec::with_capacity(2 * a.nnz());
        let mut u_diag_inv = Vec::with_capacity(n);

        let mut x = vec![T::zero(); n];
        let mut marked = vec![usize::MAX; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut topo: Vec<usize> = Vec::with_capacity(n);

        for k in 0..n {
            let col = q[k];
            // Reach of A(:, col) in the graph of L: rows in topological order.
            topo.clear();
            for (i, _) in a.column(col) {
                if marked[i] == k {
                    continue;
                }
                marked[i] = k;
                stack.push((i, 0));
                while let Some(top) = stack.last_mut() {
                    let node = top.0;
                    let jcol = pinv[node];
                    let mut next = None;
                    if jcol != none {
                        let start = l_ptr[jcol];
                        let end = l_ptr[jcol + 1];
                        while start + top.1 < end {
                            let r = l_rows[start + top.1];
                            top.1 += 1;
                            if marked[r] != k {
                                next = Some(r);
                                break;
                            }
                        }
                    }
                    match next {
                        Some(r) => {
                            marked[r] = k;
                            stack.push((r, 0));
                        }
                        None => {
                            topo.push(node);
                            stack.pop();
                        }
                    }
                }
            }
            for (i, v) in a.column(col) {
                x[i] = v;
            }
            // topo holds post-order; process in reverse for a valid elimination order.
            let mut u_col: Vec<(usize, T)> = Vec::new();
            for &j in topo.iter().rev() {
                let jcol = pinv[j];
                if jcol == none {
                    continue;
                }
                let xj = x[j];
                x[j] = T::zero();
                if xj == T::zero() {
                    continue;
                }
                u_col.push((jcol, xj));
                for p in l_ptr[jcol]..l_ptr[jcol + 1] {
                    x[l_rows[p]] -= l_vals[p] * xj;
                }
            }
            // Pivot among the rows not yet pivotal.
            let mut best = none;
            let mut best_mag = -1.0;
            for &i in &topo {
                if pinv[i] == none {
                    let m = x[i].magnitude();
                    if m > best_mag {
                        best_mag = m;
                        best = i;
                    }
                }
            }
            if best == none || best_mag <= tiny {
                return Err(Error::SingularSystem(format!("zero pivot in column {k} of {n}")));
            }
            if pinv[col] == none && x[col].magnitude() >= PIVOT_THRESHOLD * best_mag {
                best = col;
            }
            let pivot = x[best];
            pinv[best] = k;
            x[best] = T::zero();
            u_col.sort_by_key(|&(r, _)| r);
            for (r, v) in u_col {
                u_rows.push(r);
                u_vals.push(v);
            }
            u_ptr.push(u_rows.len());
            u_diag_inv.push(T::one() / pivot);
            for &i in &topo {
                if pinv[i] == none {
                    let v = x[i];
                    x[i] = T::zero();
                    if v != T::zero() {
                        l_rows.push(i);
                        l_vals.push(v / pivot);
                    }
                }
            }
            l_ptr.push(l_rows.len());
        }
        for r in &mut l_rows {
            *r = pinv[*r];
        }
        let l = CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: l_ptr,
            row_idx: l_rows,
            values: l_vals,
        };
        let u = CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: u_ptr,
            row_idx: u_rows,
            values: u_vals,
        };
        Ok(SparseLu {
            n,
            pinv,
            q: q.to_vec(),
            l,
            u,
            u_diag_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros stored in `L` and `U` (diagonal of `U` included).
    pub fn factor_nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz() + self.n
    }

    /// Solves `A x = b`, writing into `x`; `work` must have length `n`.
    pub fn solve_into(&self, b: &[T], x: &mut [T], work: &mut [T]) {
        let n = self.n;
        debug_assert!(b.len() == n && x.len() == n && work.len() >= n);
        for (i, &bi) in b.iter().enumerate() {
            work[self.pinv[i]] = bi;
        }
        let l = &self.l;
        for j in 0..n {
            let yj = work[j];
            if yj != T::zero() {
                for p in l.col_ptr[j]..l.col_ptr[j + 1] {
                    work[l.row_idx[p]] -= l.values[p] * yj;
                }
            }
        }
        let u = &self.u;
        for j in (0..n).rev() {
            let yj = work[j] * self.u_diag_inv[j];
            work[j] = yj;
            if yj != T::zero() {
                for p in u.col_ptr[j]..u.col_ptr[j + 1] {
                    work[u.row_idx[p]] -= u.values[p] * yj;
                }
            }
        }
        for (k, &col) in self.q.iter().enumerate() {
            x[col] = work[k];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = vec![T::zero(); self.n];
        let mut work = vec![T::zero(); self.n];
        self.solve_into(b, &mut x, &mut work);
        x
    }
}
