use crate::error::Result;
use crate::netmodel::case::{NetworkCase, NodeMap};
use crate::sparse::CscMatrix;
use crate::C64;

/// Bus admittance matrix split into its series (branch) part and the
/// diagonal of everything connected to ground.
///
/// Shunt content gathers bus shunts, half of each incident branch's charging
/// and constant-impedance load admittances. Node order follows [`NodeMap`].
#[derive(Debug, Clone)]
pub struct AdmittanceSplit {
    pub nodes: NodeMap,
    pub y_full: CscMatrix<C64>,
    pub y_series: CscMatrix<C64>,
    pub y_shunt: Vec<C64>,
    /// Series matrix restricted to PQ rows and columns.
    pub y_series_pq: CscMatrix<C64>,
    /// Series coupling of PQ nodes to the slack (column 0 without row 0).
    pub y_slack_column: Vec<C64>,
    pub y_full_pq: CscMatrix<C64>,
    pub y_full_slack_column: Vec<C64>,
}

pub fn assemble_admittance(case: &NetworkCase) -> Result<AdmittanceSplit> {
    case.validate()?;
    let nodes = case.node_map();
    let n = nodes.len();
    let mut series = Vec::with_capacity(4 * case.branches.len());
    let mut y_shunt = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let bus = &case.buses[nodes.bus_position(k)];
        y_shunt[k] += bus.shunt + bus.load_z;
    }
    for br in case.in_service_branches() {
        let f = nodes.index_of(br.from).unwrap();
        let t = nodes.index_of(br.to).unwrap();
        let y = br.series_admittance();
        series.extend([(f, f, y), (t, t, y), (f, t, -y), (t, f, -y)]);
        let half = br.total_charging * 0.5;
        y_shunt[f] += half;
        y_shunt[t] += half;
    }
    let y_series = CscMatrix::from_triplets(n, n, &series);
    let mut full = series;
    full.extend(
        y_shunt
            .iter()
            .enumerate()
            .filter(|(_, y)| y.norm() != 0.0)
            .map(|(k, &y)| (k, k, y)),
    );
    let y_full = CscMatrix::from_triplets(n, n, &full);

    let pq: Vec<usize> = (1..n).collect();
    let y_series_pq = y_series.select(&pq, &pq);
    let y_full_pq = y_full.select(&pq, &pq);
    let y_slack_column = (1..n).map(|i| y_series.get(i, 0)).collect();
    let y_full_slack_column = (1..n).map(|i| y_full.get(i, 0)).collect();
    Ok(AdmittanceSplit {
        nodes,
        y_full,
        y_series,
        y_shunt,
        y_series_pq,
        y_slack_column,
        y_full_pq,
        y_full_slack_column,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::case::{Branch, Bus, Slack};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single_branch() -> NetworkCase {
        NetworkCase {
            name: "2".into(),
            base_mva: 1.0,
            base_kv: 1.0,
            slack: Slack {
                id: 0,
                v0: c(1.0, 0.0),
            },
            buses: vec![Bus::unloaded(0), Bus::unloaded(1)],
            branches: vec![Branch::new(0, 1, c(0.01, 0.01))],
        }
    }

    #[test]
    fn single_branch_ybus() {
        let y = assemble_admittance(&single_branch()).unwrap();
        let d = y.y_series.to_dense();
        let tol = 1e-12;
        assert!((d[0][0] - c(50.0, -50.0)).norm() < tol);
        assert!((d[0][1] - c(-50.0, 50.0)).norm() < tol);
        assert!((d[1][0] - c(-50.0, 50.0)).norm() < tol);
        assert!((d[1][1] - c(50.0, -50.0)).norm() < tol);
        assert!(y.y_shunt.iter().all(|s| s.norm() == 0.0));
        assert_eq!(y.y_full, y.y_series);
    }

    #[test]
    fn shunts_land_on_the_diagonal() {
        let mut case = single_branch();
        case.buses[1].shunt = c(0.0, 0.2);
        case.buses[1].load_z = c(0.1, -0.05);
        case.branches[0].total_charging = c(0.0, 0.04);
        let y = assemble_admittance(&case).unwrap();
        assert_eq!(y.y_shunt[0], c(0.0, 0.02));
        assert!((y.y_shunt[1] - c(0.1, 0.17)).norm() < 1e-15);
        let full = y.y_full.to_dense();
        let ser = y.y_series.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                let expect = ser[i][j] + if i == j { y.y_shunt[i] } else { c(0.0, 0.0) };
                assert!((full[i][j] - expect).norm() <= 1e-14 * expect.norm().max(1.0));
            }
        }
        assert_eq!(y.y_slack_column, vec![c(-50.0, 50.0)]);
    }
}
