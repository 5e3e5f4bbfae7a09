use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A node with its ZIP load and fixed shunt, all in per-unit.
///
/// `load_p` is complex power drawn by the constant-power part. `load_i` is the
/// complex current phasor drawn by the constant-current part (a fixed phasor
/// evaluated at nominal voltage). `load_z` and `shunt` are admittances to
/// ground; MATPOWER's `Gs + jBs` maps onto `shunt` with positive `Bs` being
/// capacitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    #[serde(rename = "load_P")]
    pub load_p: C64,
    #[serde(rename = "load_I")]
    pub load_i: C64,
    #[serde(rename = "load_Z")]
    pub load_z: C64,
    pub shunt: C64,
}

impl Bus {
    pub fn unloaded(id: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Bus {
            id,
            load_p: zero,
            load_i: zero,
            load_z: zero,
            shunt: zero,
        }
    }

    pub fn has_load(&self) -> bool {
        let zero = C64::new(0.0, 0.0);
        self.load_p != zero || self.load_i != zero || self.load_z != zero
    }
}

/// π-model line section between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub series_impedance: C64,
    /// Total line charging admittance, split evenly between both ends.
    pub total_charging: C64,
    #[serde(default = "in_service_default")]
    pub in_service: bool,
}

fn in_service_default() -> bool {
    true
}

impl Branch {
    pub fn new(from: usize, to: usize, series_impedance: C64) -> Self {
        Branch {
            from,
            to,
            series_impedance,
            total_charging: C64::new(0.0, 0.0),
            in_service: true,
        }
    }

    pub fn series_admittance(&self) -> C64 {
        self.series_impedance.inv()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack {
    pub id: usize,
    pub v0: C64,
}

/// A single-phase network with one slack node and PQ nodes everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase {
    pub name: String,
    pub base_mva: f64,
    pub base_kv: f64,
    pub slack: Slack,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

/// Dense node numbering used by every solver: the slack is node 0 and PQ
/// nodes follow in the order they appear in the case.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMap {
    ids: Vec<usize>,
    index: HashMap<usize, usize>,
    bus_of: Vec<usize>,
}

impl NodeMap {
    /// External id of internal node `k`.
    pub fn id(&self, k: usize) -> usize {
        self.ids[k]
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Position in `NetworkCase::buses` of internal node `k`.
    pub fn bus_position(&self, k: usize) -> usize {
        self.bus_of[k]
    }

    /// Number of nodes including the slack.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of PQ nodes.
    pub fn n_pq(&self) -> usize {
        self.ids.len() - 1
    }
}

impl NetworkCase {
    /// Checks every structural invariant, including connectivity of the
    /// in-service graph.
    pub fn validate(&self) -> Result<()> {
        if self.buses.is_empty() {
            return Err(Error::Validation("case has no buses".into()));
        }
        if !(self.base_mva.is_finite() && self.base_mva > 0.0) {
            return Err(Error::Validation(format!(
                "base_mva must be positive, got {}",
                self.base_mva
            )));
        }
        if self.slack.v0.norm() == 0.0 || !self.slack.v0.is_finite() {
            return Err(Error::Validation(
                "slack voltage must be finite and nonzero".into(),
            ));
        }
        let mut seen = HashSet::new();
        for b in &self.buses {
            if !seen.insert(b.id) {
                return Err(Error::Validation(format!("duplicate bus id {}", b.id)));
            }
            for (label, v) in [
                ("load_P", b.load_p),
                ("load_I", b.load_i),
                ("load_Z", b.load_z),
                ("shunt", b.shunt),
            ] {
                if !v.is_finite() {
                    return Err(Error::Validation(format!("bus {}: {label} is not finite", b.id)));
                }
            }
        }
        let slack_bus = self
            .buses
            .iter()
            .find(|b| b.id == self.slack.id)
            .ok_or_else(|| Error::Validation(format!("slack bus {} not in bus list", self.slack.id)))?;
        if slack_bus.has_load() {
            return Err(Error::Validation(format!(
                "slack bus {} carries load",
                self.slack.id
            )));
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !seen.contains(&end) {
                    return Err(Error::Validation(format!(
                        "branch {k} references unknown bus {end}"
                    )));
                }
            }
            if br.from == br.to {
                return Err(Error::InvalidBranch {
                    index: k,
                    from: br.from,
                    to: br.to,
                    reason: "both ends on the same bus".into(),
                });
            }
            if br.series_impedance.norm() == 0.0 || !br.series_impedance.is_finite() {
                return Err(Error::InvalidBranch {
                    index: k,
                    from: br.from,
                    to: br.to,
                    reason: "series impedance must be finite and nonzero".into(),
                });
            }
        }
        self.check_connected()
    }

    fn check_connected(&self) -> Result<()> {
        let nodes = self.node_map();
        let mut adj = vec![Vec::new(); nodes.len()];
        for br in self.in_service_branches() {
            let (f, t) = (nodes.index_of(br.from).unwrap(), nodes.index_of(br.to).unwrap());
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut reached = vec![false; nodes.len()];
        reached[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match reached.iter().position(|r| !r) {
            None => Ok(()),
            Some(k) => Err(Error::DisconnectedNetwork(format!(
                "bus {} is not reachable from the slack",
                nodes.id(k)
            ))),
        }
    }

    pub fn in_service_branches(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.in_service)
    }

    /// Internal numbering with the slack first. Panics if the slack id is
    /// missing; call [`NetworkCase::validate`] first on untrusted input.
    pub fn node_map(&self) -> NodeMap {
        let slack_pos = self
            .buses
            .iter()
            .position(|b| b.id == self.slack.id)
            .expect("slack bus present");
        let mut bus_of = vec![slack_pos];
        bus_of.extend((0..self.buses.len()).filter(|&p| p != slack_pos));
        let ids: Vec<usize> = bus_of.iter().map(|&p| self.buses[p].id).collect();
        let index = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        NodeMap { ids, index, bus_of }
    }

    /// Number of PQ nodes.
    pub fn n_pq(&self) -> usize {
        self.buses.len() - 1
    }

    pub fn is_unloaded(&self) -> bool {
        self.buses.iter().all(|b| !b.has_load() && b.shunt.norm() == 0.0)
            && self.in_service_branches().all(|b| b.total_charging.norm() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> NetworkCase {
        NetworkCase {
            name: "two".into(),
            base_mva: 1.0,
            base_kv: 1.0,
            slack: Slack {
                id: 7,
                v0: C64::new(1.0, 0.0),
            },
            buses: vec![Bus::unloaded(3), Bus::unloaded(7)],
            branches: vec![Branch::new(7, 3, C64::new(0.01, 0.01))],
        }
    }

    #[test]
    fn slack_is_node_zero() {
        let m = two_bus().node_map();
        assert_eq!(m.ids(), &[7, 3]);
        assert_eq!(m.index_of(3), Some(1));
        assert_eq!(m.bus_position(0), 1);
    }

    #[test]
    fn rejects_zero_impedance() {
        let mut c = two_bus();
        c.branches[0].series_impedance = C64::new(0.0, 0.0);
        assert!(matches!(c.validate(), Err(Error::InvalidBranch { .. })));
    }

    #[test]
    fn rejects_disconnected_graph() {
        let mut c = two_bus();
        c.buses.push(Bus::unloaded(9));
        assert!(matches!(c.validate(), Err(Error::DisconnectedNetwork(_))));
        c.branches.push(Branch::new(3, 9, C64::new(0.1, 0.0)));
        c.validate().unwrap();
        c.branches[1].in_service = false;
        assert!(matches!(c.validate(), Err(Error::DisconnectedNetwork(_))));
    }

    #[test]
    fn rejects_loaded_slack_and_self_loops() {
        let mut c = two_bus();
        c.buses[1].load_p = C64::new(0.1, 0.0);
        assert!(matches!(c.validate(), Err(Error::Validation(_))));
        let mut c = two_bus();
        c.branches.push(Branch::new(3, 3, C64::new(0.1, 0.0)));
        assert!(matches!(c.validate(), Err(Error::InvalidBranch { .. })));
    }
}
