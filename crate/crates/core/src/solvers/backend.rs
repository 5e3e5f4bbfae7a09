use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{IncidenceStructure, Topology};
use crate::sparse::{CscMatrix, SparseLu};
use crate::C64;

/// Which linear operator solves `Ỹ x = r` once per series order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Lu,
    Sweep,
    Dlf,
}

/// Reusable buffers for [`Step4Backend::solve_order_into`].
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    a: Vec<C64>,
    b: Vec<C64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            a: vec![C64::new(0.0, 0.0); n + 1],
            b: vec![C64::new(0.0, 0.0); n + 1],
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }
}

/// Leaf-to-root and root-to-leaf passes over a radial feeder.
///
/// Nodes are renumbered by breadth-first position so that every parent
/// precedes its children; position 0 is the slack.
#[derive(Debug, Clone)]
pub struct SweepSchedule {
    /// position -> internal node (position 0 is the slack)
    node: Vec<usize>,
    /// position -> parent position
    parent: Vec<usize>,
    /// position -> impedance of the branch to the parent
    z: Vec<C64>,
}

impl SweepSchedule {
    pub fn new(inc: &IncidenceStructure) -> Result<Self> {
        if inc.topology != Topology::Radial {
            return Err(Error::Topology(
                "sweeps need a radial network; use the LU or DLF backend".into(),
            ));
        }
        let n = inc.n_pq + 1;
        let mut node = Vec::with_capacity(n);
        let mut pos = vec![usize::MAX; n];
        node.push(0);
        pos[0] = 0;
        let mut parent = vec![0; n];
        let mut z = vec![C64::new(0.0, 0.0); n];
        for &b in &inc.branch_order {
            let (f, t) = inc.ends[b];
            let child = if pos[f] == usize::MAX { f } else { t };
            let (p, _) = inc.parent[child].expect("every PQ node has a parent");
            pos[child] = node.len();
            parent[node.len()] = pos[p];
            z[node.len()] = inc.y_b[b].inv();
            node.push(child);
        }
        Ok(SweepSchedule { node, parent, z })
    }

    pub fn n_pq(&self) -> usize {
        self.node.len() - 1
    }

    /// Solves `Ỹ (x − root·1) = injection` by one backward current summation
    /// and one forward voltage update. With `root = 0` this applies `Ỹ⁻¹`.
    pub fn apply(&self, injection: &[C64], root: C64, x: &mut [C64], scratch: &mut Scratch) {
        let n = self.node.len();
        let j = &mut scratch.a[..n];
        for p in 1..n {
            j[p] = injection[self.node[p] - 1];
        }
        for p in (1..n).rev() {
            let q = self.parent[p];
            let jp = j[p];
            j[q] += jp;
        }
        let v = &mut scratch.b[..n];
        v[0] = root;
        for p in 1..n {
            v[p] = v[self.parent[p]] + self.z[p] * j[p];
        }
        for p in 1..n {
            x[self.node[p] - 1] = v[p];
        }
    }
}

/// `DLF = (Ã Y_b Ãᵀ)⁻¹`, stored as an explicit matrix or kept factored.
#[derive(Debug, Clone)]
pub enum DlfOperator {
    /// Column-major real and imaginary parts, stored separately so the
    /// product runs on plain `f64` lanes.
    Dense {
        n: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    },
    Factored(SparseLu<C64>),
}

impl DlfOperator {
    pub fn new(inc: &IncidenceStructure, dense_threshold: usize) -> Result<Self> {
        Self::from_matrix(&inc.reduced_series_matrix(), dense_threshold)
    }

    /// Inverse of an arbitrary nonsingular PQ-block matrix in the same
    /// storage scheme.
    pub fn from_matrix(m: &CscMatrix<C64>, dense_threshold: usize) -> Result<Self> {
        let lu = SparseLu::factor(m)?;
        let n = m.ncols();
        if n > dense_threshold {
            return Ok(DlfOperator::Factored(lu));
        }
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        let mut work = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            e[k] = C64::new(1.0, 0.0);
            lu.solve_into(&e, &mut col, &mut work);
            e[k] = C64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                re[k * n + i] = v.re;
                im[k * n + i] = v.im;
            }
        }
        Ok(DlfOperator::Dense { n, re, im })
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, DlfOperator::Dense { .. })
    }

    /// Entry `(i, k)` of the operator (test and inspection helper).
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        match self {
            DlfOperator::Dense { n, re, im } => (0..*n)
                .map(|i| (0..*n).map(|k| C64::new(re[k * n + i], im[k * n + i])).collect())
                .collect(),
            DlfOperator::Factored(lu) => {
                let n = lu.dim();
                let mut cols = Vec::with_capacity(n);
                let mut e = vec![C64::new(0.0, 0.0); n];
                for k in 0..n {
                    e[k] = C64::new(1.0, 0.0);
                    cols.push(lu.solve(&e));
                    e[k] = C64::new(0.0, 0.0);
                }
                (0..n).map(|i| (0..n).map(|k| cols[k][i]).collect()).collect()
            }
        }
    }

    /// `x = DLF · r`.
    pub fn apply(&self, r: &[C64], x: &mut [C64], scratch: &mut Scratch) {
        match self {
            DlfOperator::Dense { n, re, im } => {
                let n = *n;
                let (yr, yi) = (&mut scratch.re[..n], &mut scratch.im[..n]);
                yr.fill(0.0);
                yi.fill(0.0);
                for (k, rk) in r.iter().enumerate().take(n) {
                    axpy_split(&re[k * n..(k + 1) * n], &im[k * n..(k + 1) * n], *rk, yr, yi);
                }
                for (out, (a, b)) in x.iter_mut().zip(yr.iter().zip(yi.iter())) {
                    *out = C64::new(*a, *b);
                }
            }
            DlfOperator::Factored(lu) => lu.solve_into(r, x, &mut scratch.a[..lu.dim()]),
        }
    }
}

/// `y += c · col` on split real/imaginary storage.
#[inline]
fn axpy_split(col_re: &[f64], col_im: &[f64], c: C64, yr: &mut [f64], yi: &mut [f64]) {
    for ((yr, yi), (a, b)) in yr.iter_mut().zip(yi.iter_mut()).zip(col_re.iter().zip(col_im)) {
        *yr += a * c.re - b * c.im;
        *yi += a * c.im + b * c.re;
    }
}

/// A prepared Step-4 operator for the coefficient recursion.
#[derive(Debug, Clone)]
pub enum Step4Backend {
    Lu(SparseLu<C64>),
    Sweep(SweepSchedule),
    Dlf(DlfOperator),
}

pub fn prepare_lu_backend(y_series_pq: &CscMatrix<C64>) -> Result<Step4Backend> {
    Ok(Step4Backend::Lu(SparseLu::factor(y_series_pq)?))
}

pub fn prepare_sweep_backend(inc: &IncidenceStructure) -> Result<Step4Backend> {
    Ok(Step4Backend::Sweep(SweepSchedule::new(inc)?))
}

/// Default size up to which the DLF matrix is formed explicitly.
pub const DLF_DENSE_THRESHOLD: usize = 512;

pub fn prepare_dlf_backend(inc: &IncidenceStructure, dense_threshold: usize) -> Result<Step4Backend> {
    Ok(Step4Backend::Dlf(DlfOperator::new(inc, dense_threshold)?))
}

impl Step4Backend {
    pub fn variant(&self) -> Variant {
        match self {
            Step4Backend::Lu(_) => Variant::Lu,
            Step4Backend::Sweep(_) => Variant::Sweep,
            Step4Backend::Dlf(_) => Variant::Dlf,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Step4Backend::Lu(lu) => lu.dim(),
            Step4Backend::Sweep(s) => s.n_pq(),
            Step4Backend::Dlf(DlfOperator::Dense { n, .. }) => *n,
            Step4Backend::Dlf(DlfOperator::Factored(lu)) => lu.dim(),
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(self.dim())
    }

    pub fn solve_order_into(&self, rhs: &[C64], x: &mut [C64], scratch: &mut Scratch) {
        match self {
            Step4Backend::Lu(lu) => lu.solve_into(rhs, x, &mut scratch.a[..lu.dim()]),
            Step4Backend::Sweep(s) => s.apply(rhs, C64::new(0.0, 0.0), x, scratch),
            Step4Backend::Dlf(d) => d.apply(rhs, x, scratch),
        }
    }

    pub fn solve_order(&self, rhs: &[C64]) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); rhs.len()];
        let mut scratch = self.scratch();
        self.solve_order_into(rhs, &mut x, &mut scratch);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_incidence, Branch, Bus, NetworkCase, Slack};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn case(branches: Vec<Branch>, n: usize) -> NetworkCase {
        NetworkCase {
            name: "t".into(),
            base_mva: 1.0,
            base_kv: 1.0,
            slack: Slack {
                id: 0,
                v0: c(1.0, 0.0),
            },
            buses: (0..n).map(Bus::unloaded).collect(),
            branches,
        }
    }

    fn backends(nc: &NetworkCase) -> Vec<Step4Backend> {
        let inc = build_incidence(nc).unwrap();
        let mut out = vec![
            prepare_lu_backend(&inc.reduced_series_matrix()).unwrap(),
            prepare_dlf_backend(&inc, DLF_DENSE_THRESHOLD).unwrap(),
            prepare_dlf_backend(&inc, 0).unwrap(),
        ];
        if inc.topology == Topology::Radial {
            out.push(prepare_sweep_backend(&inc).unwrap());
        }
        out
    }

    #[test]
    fn two_bus_is_scalar_division() {
        let nc = case(vec![Branch::new(0, 1, c(0.01, 0.01))], 2);
        let r = c(0.3, -0.7);
        for b in backends(&nc) {
            let x = b.solve_order(&[r]);
            assert!((x[0] - r / c(50.0, -50.0)).norm() < 1e-14, "{:?}", b.variant());
        }
    }

    #[test]
    fn path_with_load_at_the_end() {
        let z1 = c(0.01, 0.02);
        let z2 = c(0.03, 0.01);
        // reversed orientation on the second branch
        let nc = case(vec![Branch::new(0, 1, z1), Branch::new(2, 1, z2)], 3);
        let cur = c(-0.2, 0.1);
        // both branches carry `cur`; voltages from two forward steps
        let x1 = z1 * cur;
        let x2 = x1 + z2 * cur;
        for b in backends(&nc) {
            let x = b.solve_order(&[c(0.0, 0.0), cur]);
            assert!(
                (x[0] - x1).norm() < 1e-14 && (x[1] - x2).norm() < 1e-14,
                "{:?}",
                b.variant()
            );
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let nc = case(
            vec![Branch::new(0, 1, c(0.01, 0.02)), Branch::new(1, 2, c(0.01, 0.02))],
            3,
        );
        for b in backends(&nc) {
            assert_eq!(b.solve_order(&[c(0.0, 0.0); 2]), vec![c(0.0, 0.0); 2]);
        }
    }

    #[test]
    fn triangle_dlf_matches_lu() {
        let nc = case(
            vec![
                Branch::new(0, 1, c(0.01, 0.02)),
                Branch::new(1, 2, c(0.02, 0.01)),
                Branch::new(2, 0, c(0.05, 0.04)),
            ],
            3,
        );
        let inc = build_incidence(&nc).unwrap();
        assert!(prepare_sweep_backend(&inc).is_err());
        let r = [c(0.2, -0.1), c(-0.4, 0.3)];
        let bs = backends(&nc);
        let want = bs[0].solve_order(&r);
        for b in &bs[1..] {
            let x = b.solve_order(&r);
            for (a, w) in x.iter().zip(&want) {
                assert!((a - w).norm() < 1e-10 * (1.0 + w.norm()));
            }
        }
    }

    #[test]
    fn disconnected_block_is_singular() {
        let m = CscMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, -1.0))]);
        assert!(matches!(prepare_lu_backend(&m), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn axpy_split_matches_complex_arithmetic() {
        let col: Vec<C64> = (0..7).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        let (re, im): (Vec<f64>, Vec<f64>) = col.iter().map(|z| (z.re, z.im)).unzip();
        let (mut yr, mut yi) = (vec![1.0; 7], vec![-1.0; 7]);
        let s = c(0.5, 2.0);
        axpy_split(&re, &im, s, &mut yr, &mut yi);
        for k in 0..7 {
            let want = c(1.0, -1.0) + col[k] * s;
            assert!((c(yr[k], yi[k]) - want).norm() < 1e-14);
        }
    }
}
