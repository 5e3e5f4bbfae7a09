use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::netmodel::case::NetworkCase;
use crate::sparse::CscMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Radial,
    WeaklyMeshed,
}

/// Oriented node-branch incidence of the in-service graph.
///
/// Column `b` of `a` holds `+1` at the from-node and `-1` at the to-node of
/// branch `b`. Row 0 (the slack) is split off as `a0`; the PQ rows form
/// `a_tilde`. For radial feeders `parent` and `branch_order` describe the
/// spanning tree rooted at the slack.
#[derive(Debug, Clone)]
pub struct IncidenceStructure {
    pub n_pq: usize,
    /// `(from, to)` internal node indices per in-service branch.
    pub ends: Vec<(usize, usize)>,
    /// Position of each in-service branch in `NetworkCase::branches`.
    pub case_branch: Vec<usize>,
    /// Branch admittances, the diagonal of `Y_b`.
    pub y_b: Vec<C64>,
    pub a: CscMatrix<f64>,
    pub a0: Vec<f64>,
    pub a_tilde: CscMatrix<f64>,
    /// Branches in breadth-first order from the slack (radial only).
    pub branch_order: Vec<usize>,
    /// Per internal node: `(parent node, incoming branch)`; `None` for the
    /// slack. Empty unless radial.
    pub parent: Vec<Option<(usize, usize)>>,
    pub topology: Topology,
}

pub fn build_incidence(case: &NetworkCase) -> Result<IncidenceStructure> {
    case.validate()?;
    let nodes = case.node_map();
    let n = nodes.len();
    let mut ends = Vec::new();
    let mut case_branch = Vec::new();
    let mut y_b = Vec::new();
    for (k, br) in case.branches.iter().enumerate() {
        if !br.in_service {
            continue;
        }
        ends.push((nodes.index_of(br.from).unwrap(), nodes.index_of(br.to).unwrap()));
        case_branch.push(k);
        y_b.push(br.series_admittance());
    }
    let nb = ends.len();
    if nb < n - 1 {
        return Err(Error::DisconnectedNetwork(format!(
            "{nb} branches cannot connect {} PQ nodes",
            n - 1
        )));
    }
    let mut trip = Vec::with_capacity(2 * nb);
    for (b, &(f, t)) in ends.iter().enumerate() {
        trip.push((f, b, 1.0));
        trip.push((t, b, -1.0));
    }
    let a = CscMatrix::from_triplets(n, nb, &trip);
    let a0 = (0..nb).map(|b| a.get(0, b)).collect();
    let pq: Vec<usize> = (1..n).collect();
    let all_b: Vec<usize> = (0..nb).collect();
    let a_tilde = a.select(&pq, &all_b);

    let topology = if nb == n - 1 {
        Topology::Radial
    } else {
        Topology::WeaklyMeshed
    };
    let (branch_order, parent) = if topology == Topology::Radial {
        spanning_tree(n, &ends)?
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(IncidenceStructure {
        n_pq: n - 1,
        ends,
        case_branch,
        y_b,
        a,
        a0,
        a_tilde,
        branch_order,
        parent,
        topology,
    })
}

type Tree = (Vec<usize>, Vec<Option<(usize, usize)>>);

fn spanning_tree(n: usize, ends: &[(usize, usize)]) -> Result<Tree> {
    let mut adj = vec![Vec::new(); n];
    for (b, &(f, t)) in ends.iter().enumerate() {
        adj[f].push((t, b));
        adj[t].push((f, b));
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n - 1);
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(v, b) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, b));
                order.push(b);
                queue.push_back(v);
            }
        }
    }
    if order.len() != n - 1 {
        return Err(Error::DisconnectedNetwork(
            "graph has a loop and an island; not a spanning tree".into(),
        ));
    }
    Ok((order, parent))
}

pub fn classify_topology(incidence: &IncidenceStructure) -> Topology {
    if incidence.ends.len() == incidence.n_pq {
        Topology::Radial
    } else {
        Topology::WeaklyMeshed
    }
}

impl IncidenceStructure {
    pub fn n_branches(&self) -> usize {
        self.ends.len()
    }

    fn require_radial(&self, what: &str) -> Result<()> {
        if self.topology == Topology::Radial {
            Ok(())
        } else {
            Err(Error::Topology(format!("{what} requires a radial network")))
        }
    }

    /// `Ã Y_b Ãᵀ`, equal to the PQ block of the series admittance matrix.
    pub fn reduced_series_matrix(&self) -> CscMatrix<C64> {
        let mut trip = Vec::with_capacity(4 * self.ends.len());
        for (b, &(f, t)) in self.ends.iter().enumerate() {
            let y = self.y_b[b];
            let (f, t) = (f.wrapping_sub(1), t.wrapping_sub(1));
            let fp = f != usize::MAX;
            let tp = t != usize::MAX;
            if fp {
                trip.push((f, f, y));
            }
            if tp {
                trip.push((t, t, y));
            }
            if fp && tp {
                trip.push((f, t, -y));
                trip.push((t, f, -y));
            }
        }
        CscMatrix::from_triplets(self.n_pq, self.n_pq, &trip)
    }

    pub fn a_tilde_dense(&self) -> DenseMatrix {
        let rows: Vec<Vec<C64>> = self
            .a_tilde
            .to_dense()
            .into_iter()
            .map(|r| r.into_iter().map(|v| C64::new(v, 0.0)).collect())
            .collect();
        DenseMatrix::from_rows(&rows)
    }

    /// `Y_b Ãᵀ` as a dense branch-by-node matrix.
    pub fn yb_a_tilde_t_dense(&self) -> DenseMatrix {
        let at = self.a_tilde_dense();
        let mut m = DenseMatrix::zeros(self.n_branches(), self.n_pq);
        for b in 0..self.n_branches() {
            for i in 0..self.n_pq {
                m[(b, i)] = self.y_b[b] * at[(i, b)];
            }
        }
        m
    }

    /// Sign relating the oriented current of the branch into `node` from its
    /// parent to the child-to-parent current used by the sweeps.
    fn child_sign(&self, node: usize, branch: usize) -> f64 {
        if self.ends[branch].0 == node {
            1.0
        } else {
            -1.0
        }
    }

    /// Bus-injection to branch-current matrix built by path tracing: entry
    /// `(b, k)` is nonzero when branch `b` lies on the path from the slack to
    /// PQ node `k`.
    pub fn bibc_by_paths(&self) -> Result<DenseMatrix> {
        self.require_radial("BIBC")?;
        let mut m = DenseMatrix::zeros(self.n_branches(), self.n_pq);
        for k in 1..=self.n_pq {
            let mut node = k;
            while let Some((p, b)) = self.parent[node] {
                m[(b, k - 1)] = C64::new(self.child_sign(node, b), 0.0);
                node = p;
            }
        }
        Ok(m)
    }

    /// Branch-current to bus-voltage matrix built by path tracing: row `k`
    /// accumulates the impedances on the path from the slack to node `k`.
    pub fn bcbv_by_paths(&self) -> Result<DenseMatrix> {
        self.require_radial("BCBV")?;
        let mut m = DenseMatrix::zeros(self.n_pq, self.n_branches());
        for k in 1..=self.n_pq {
            let mut node = k;
            while let Some((p, b)) = self.parent[node] {
                m[(k - 1, b)] = self.y_b[b].inv() * self.child_sign(node, b);
                node = p;
            }
        }
        Ok(m)
    }
}
