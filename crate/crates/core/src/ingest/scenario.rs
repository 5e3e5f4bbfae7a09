use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::native::toml_error;
use crate::netmodel::{Branch, NetworkCase};

/// A loading condition: ZIP multipliers plus optional tie branches that turn
/// a radial feeder into a weakly meshed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(rename = "lambda_P", default = "unit")]
    pub lambda_p: f64,
    #[serde(rename = "lambda_I", default = "unit")]
    pub lambda_i: f64,
    #[serde(rename = "lambda_Z", default = "unit")]
    pub lambda_z: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tie_branches: Vec<Branch>,
    /// Fractions `[P, I, Z]` used to re-split each bus's constant-power load
    /// into ZIP components before scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zip_split: Option<[f64; 3]>,
}

fn unit() -> f64 {
    1.0
}

impl Scenario {
    pub fn nominal() -> Self {
        Scenario::uniform("nominal", 1.0, 1.0, 1.0)
    }

    pub fn uniform(name: &str, p: f64, i: f64, z: f64) -> Self {
        Scenario {
            name: name.to_string(),
            lambda_p: p,
            lambda_i: i,
            lambda_z: z,
            tie_branches: Vec::new(),
            zip_split: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in [
            ("lambda_P", self.lambda_p),
            ("lambda_I", self.lambda_i),
            ("lambda_Z", self.lambda_z),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!(
                    "scenario {}: {label} must be finite and nonnegative, got {v}",
                    self.name
                )));
            }
        }
        if let Some(split) = self.zip_split {
            if split.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
                return Err(Error::Validation(format!(
                    "scenario {}: zip_split fractions must be nonnegative",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct ScenarioDoc {
    scenario: Scenario,
}

/// Parses a standalone `[scenario]` document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    doc.scenario.validate()?;
    Ok(doc.scenario)
}

pub fn serialize_scenario(scenario: &Scenario) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        scenario: &'a Scenario,
    }
    toml::to_string(&Out { scenario }).expect("scenarios always serialize")
}

/// Returns a copy of `case` with loads scaled and tie branches appended.
pub fn apply_scenario(case: &NetworkCase, scenario: &Scenario) -> Result<NetworkCase> {
    scenario.validate()?;
    let mut out = case.clone();
    for bus in &mut out.buses {
        if let Some([fp, fi, fz]) = scenario.zip_split {
            let nominal = bus.load_p;
            bus.load_p = nominal * fp;
            // fixed current phasor and admittance that draw `nominal` at 1∠0
            bus.load_i += (nominal * fi).conj();
            bus.load_z += (nominal * fz).conj();
        }
        bus.load_p *= scenario.lambda_p;
        bus.load_i *= scenario.lambda_i;
        bus.load_z *= scenario.lambda_z;
    }
    let known: std::collections::HashSet<usize> = case.buses.iter().map(|b| b.id).collect();
    for tie in &scenario.tie_branches {
        for end in [tie.from, tie.to] {
            if !known.contains(&end) {
                return Err(Error::Validation(format!(
                    "scenario {}: tie branch references unknown bus {end}",
                    scenario.name
                )));
            }
        }
        out.branches.push(*tie);
    }
    if scenario.name != "nominal" && !scenario.name.is_empty() {
        out.name = format!("{}+{}", case.name, scenario.name);
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Bus, Slack};
    use crate::C64;
    use proptest::prelude::*;

    fn case() -> NetworkCase {
        let mut b1 = Bus::unloaded(1);
        b1.load_p = C64::new(0.02, 0.01);
        b1.load_i = C64::new(0.003, -0.001);
        b1.load_z = C64::new(0.004, -0.002);
        NetworkCase {
            name: "c".into(),
            base_mva: 1.0,
            base_kv: 1.0,
            slack: Slack {
                id: 0,
                v0: C64::new(1.0, 0.0),
            },
            buses: vec![Bus::unloaded(0), b1, Bus::unloaded(2)],
            branches: vec![
                Branch::new(0, 1, C64::new(0.01, 0.01)),
                Branch::new(1, 2, C64::new(0.01, 0.01)),
            ],
        }
    }

    #[test]
    fn unit_scenario_is_identity() {
        let c = case();
        let out = apply_scenario(&c, &Scenario::nominal()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn medium_factors_scale_each_component() {
        let c = case();
        let out = apply_scenario(&c, &Scenario::uniform("medium", 4.0, 20.0, 40.0)).unwrap();
        assert_eq!(out.buses[1].load_p, c.buses[1].load_p * 4.0);
        assert_eq!(out.buses[1].load_i, c.buses[1].load_i * 20.0);
        assert_eq!(out.buses[1].load_z, c.buses[1].load_z * 40.0);
        assert_eq!(c.buses[1].load_p, C64::new(0.02, 0.01), "input untouched");
    }

    #[test]
    fn tie_branch_to_unknown_bus_fails() {
        let mut s = Scenario::nominal();
        s.tie_branches.push(Branch::new(2, 99, C64::new(0.1, 0.1)));
        assert!(matches!(apply_scenario(&case(), &s), Err(Error::Validation(_))));
    }

    #[test]
    fn negative_multiplier_rejected() {
        let s = Scenario::uniform("bad", -1.0, 1.0, 1.0);
        assert!(apply_scenario(&case(), &s).is_err());
    }

    #[test]
    fn zip_split_preserves_nominal_power_at_unit_voltage() {
        let mut c = case();
        c.buses[1].load_i = C64::new(0.0, 0.0);
        c.buses[1].load_z = C64::new(0.0, 0.0);
        let mut s = Scenario::nominal();
        s.zip_split = Some([0.5, 0.3, 0.2]);
        let out = apply_scenario(&c, &s).unwrap();
        let b = out.buses[1];
        let v = C64::new(1.0, 0.0);
        let drawn = b.load_p + v * b.load_i.conj() + v * (b.load_z * v).conj();
        assert!((drawn - c.buses[1].load_p).norm() < 1e-15);
    }

    #[test]
    fn scenario_document_round_trip() {
        let mut s = Scenario::uniform("high", 7.0, 50.0, 60.0);
        s.tie_branches.push(Branch::new(1, 2, C64::new(0.2, 0.3)));
        let back = load_scenario(&serialize_scenario(&s)).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn scaling_composes_multiplicatively(
            a in (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0),
            b in (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0),
        ) {
            let c = case();
            let first = apply_scenario(&c, &Scenario::uniform("a", a.0, a.1, a.2)).unwrap();
            let twice = apply_scenario(&first, &Scenario::uniform("b", b.0, b.1, b.2)).unwrap();
            let once = apply_scenario(&c, &Scenario::uniform("ab", a.0 * b.0, a.1 * b.1, a.2 * b.2)).unwrap();
            for (x, y) in twice.buses.iter().zip(&once.buses) {
                prop_assert!((x.load_p - y.load_p).norm() <= 1e-15 * (1.0 + y.load_p.norm()) * 4.0);
                prop_assert!((x.load_i - y.load_i).norm() <= 1e-15 * (1.0 + y.load_i.norm()) * 4.0);
                prop_assert!((x.load_z - y.load_z).norm() <= 1e-15 * (1.0 + y.load_z.norm()) * 4.0);
            }
        }
    }
}
