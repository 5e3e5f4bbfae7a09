use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::case::{NetworkCase, NodeMap};
use crate::C64;

/// Multipliers applied to the constant-power, constant-current and
/// constant-impedance parts of every load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipScale {
    pub p: f64,
    pub i: f64,
    pub z: f64,
}

impl ZipScale {
    pub const UNIT: ZipScale = ZipScale {
        p: 1.0,
        i: 1.0,
        z: 1.0,
    };
}

impl Default for ZipScale {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Where ground-connected admittances (fixed shunts, line charging and
/// constant-impedance loads) live in a fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuntHandling {
    /// Folded into the iteration matrix; injections carry P and I parts only.
    Matrix,
    /// Carried as voltage-dependent currents `-y V`.
    Current,
}

/// Per-PQ-node load data in internal order (slack excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadModel {
    /// Constant power drawn.
    pub s_load: Vec<C64>,
    /// Constant current phasor drawn.
    pub i_load: Vec<C64>,
    /// Constant-impedance load admittance.
    pub y_load: Vec<C64>,
    /// Bus shunt plus half of the charging of every incident branch.
    pub y_fixed: Vec<C64>,
}

impl LoadModel {
    pub fn from_case(case: &NetworkCase, nodes: &NodeMap) -> Self {
        let n = nodes.n_pq();
        let zero = C64::new(0.0, 0.0);
        let mut m = LoadModel {
            s_load: vec![zero; n],
            i_load: vec![zero; n],
            y_load: vec![zero; n],
            y_fixed: vec![zero; n],
        };
        for k in 1..=n {
            let bus = &case.buses[nodes.bus_position(k)];
            m.s_load[k - 1] = bus.load_p;
            m.i_load[k - 1] = bus.load_i;
            m.y_load[k - 1] = bus.load_z;
            m.y_fixed[k - 1] = bus.shunt;
        }
        for br in case.in_service_branches() {
            let half = br.total_charging * 0.5;
            for end in [br.from, br.to] {
                let k = nodes.index_of(end).unwrap();
                if k > 0 {
                    m.y_fixed[k - 1] += half;
                }
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.s_load.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_load.is_empty()
    }

    /// Nodal injection currents at the PQ nodes for voltages `v`.
    pub fn injection_into(
        &self,
        v: &[C64],
        scale: ZipScale,
        handling: ShuntHandling,
        out: &mut [C64],
    ) -> Result<()> {
        for i in 0..self.len() {
            let vi = v[i];
            let s = self.s_load[i] * scale.p;
            let mut cur = -self.i_load[i] * scale.i;
            if s.re != 0.0 || s.im != 0.0 {
                if vi.re == 0.0 && vi.im == 0.0 {
                    return Err(Error::NumericDomain(format!(
                        "zero voltage at PQ node {} with constant-power load",
                        i + 1
                    )));
                }
                cur -= (s / vi).conj();
            }
            if handling == ShuntHandling::Current {
                cur -= (self.y_fixed[i] + self.y_load[i] * scale.z) * vi;
            }
            out[i] = cur;
        }
        Ok(())
    }

    /// Complex power the network must deliver into each PQ node at voltages
    /// `v` (negative of the load), for the parts not already inside `Y_full`.
    pub fn scheduled_injection(&self, i: usize, vi: C64) -> C64 {
        -self.s_load[i] - vi * self.i_load[i].conj()
    }
}

/// Injection currents at PQ nodes under a ZIP model.
pub fn zip_current_injection(
    loads: &LoadModel,
    v: &[C64],
    scale: ZipScale,
    handling: ShuntHandling,
) -> Result<Vec<C64>> {
    if v.len() != loads.len() {
        return Err(Error::Precondition(format!(
            "voltage vector has {} entries, expected {}",
            v.len(),
            loads.len()
        )));
    }
    let mut out = vec![C64::new(0.0, 0.0); loads.len()];
    loads.injection_into(v, scale, handling, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one_node(s: C64, i: C64, y: C64) -> LoadModel {
        LoadModel {
            s_load: vec![s],
            i_load: vec![i],
            y_load: vec![y],
            y_fixed: vec![c(0.0, 0.0)],
        }
    }

    #[test]
    fn no_load_gives_zero_current() {
        let m = one_node(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let out =
            zip_current_injection(&m, &[c(0.97, -0.02)], ZipScale::UNIT, ShuntHandling::Current).unwrap();
        assert_eq!(out, vec![c(0.0, 0.0)]);
    }

    #[test]
    fn constant_power_at_unit_voltage() {
        let m = one_node(c(1.0, 0.5), c(0.0, 0.0), c(0.0, 0.0));
        let out = zip_current_injection(&m, &[c(1.0, 0.0)], ZipScale::UNIT, ShuntHandling::Matrix).unwrap();
        assert_eq!(out, vec![-c(1.0, -0.5)]);
    }

    #[test]
    fn mixed_zip_matches_hand_evaluation() {
        // hand evaluation of each term at V = 0.95 - 0.03j, lambda = (4, 20, 40)
        let s = c(0.02, 0.01);
        let i = c(0.003, -0.001);
        let y = c(0.004, -0.002);
        let v = c(0.95, -0.03);
        let m = one_node(s, i, y);
        let scale = ZipScale {
            p: 4.0,
            i: 20.0,
            z: 40.0,
        };
        let got = zip_current_injection(&m, &[v], scale, ShuntHandling::Current).unwrap()[0];
        // conj(4 s / v): 4s = 0.08+0.04j; /v: (0.08+0.04j)(0.95+0.03j)/|v|^2
        let vv = 0.95f64 * 0.95 + 0.03 * 0.03;
        let p_re = (0.08 * 0.95 - 0.04 * 0.03) / vv;
        let p_im = (0.08 * 0.03 + 0.04 * 0.95) / vv;
        let p_term = c(p_re, -p_im);
        let i_term = c(0.06, -0.02);
        // 40 y v = (0.16 - 0.08j)(0.95 - 0.03j)
        let z_term = c(0.16 * 0.95 - 0.08 * 0.03, -0.16 * 0.03 - 0.08 * 0.95);
        let expect = -(p_term + i_term + z_term);
        assert!((got - expect).norm() < 1e-15);
        let matrix = zip_current_injection(&m, &[v], scale, ShuntHandling::Matrix).unwrap()[0];
        assert!((matrix - (-(p_term + i_term))).norm() < 1e-15);
    }

    #[test]
    fn zero_voltage_is_a_domain_error() {
        let m = one_node(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let r = zip_current_injection(&m, &[c(0.0, 0.0)], ZipScale::UNIT, ShuntHandling::Matrix);
        assert!(matches!(r, Err(Error::NumericDomain(_))));
    }
}
