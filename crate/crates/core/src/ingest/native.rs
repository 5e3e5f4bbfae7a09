//! Native TOML case format.
//!
//! ```toml
//! [meta]
//! name = "feeder"
//! base_mva = 10.0
//! base_kv = 12.66
//! slack_id = 1
//! slack_v0_re = 1.0
//! slack_v0_im = 0.0
//!
//! [[buses]]
//! id = 2
//! load_P = [0.01, 0.006]   # complex numbers are [re, im]
//! load_I = [0.0, 0.0]
//! load_Z = [0.0, 0.0]
//! shunt = [0.0, 0.0]
//!
//! [[branches]]
//! from = 1
//! to = 2
//! series_impedance = [0.0057, 0.0029]
//! total_charging = [0.0, 0.0]
//! in_service = true
//!
//! [scenario]            # optional
//! name = "heavy"
//! lambda_P = 2.0
//! lambda_I = 1.0
//! lambda_Z = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::scenario::Scenario;
use crate::netmodel::{Branch, Bus, NetworkCase, Slack};
use crate::C64;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    name: String,
    base_mva: f64,
    #[serde(default)]
    base_kv: f64,
    slack_id: usize,
    #[serde(default = "one")]
    slack_v0_re: f64,
    #[serde(default)]
    slack_v0_im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
struct Document {
    meta: Meta,
    #[serde(default)]
    buses: Vec<Bus>,
    #[serde(default)]
    branches: Vec<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario: Option<Scenario>,
}

/// Converts a TOML deserialization error into a line-tagged parse error.
pub(crate) fn toml_error(text: &str, err: toml::de::Error) -> Error {
    let line = err
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::parse(line, err.message().to_string())
}

/// Parses a native case document, returning its embedded scenario if any.
pub fn load_native_document(text: &str) -> Result<(NetworkCase, Option<Scenario>)> {
    let doc: Document = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let case = NetworkCase {
        name: doc.meta.name,
        base_mva: doc.meta.base_mva,
        base_kv: doc.meta.base_kv,
        slack: Slack {
            id: doc.meta.slack_id,
            v0: C64::new(doc.meta.slack_v0_re, doc.meta.slack_v0_im),
        },
        buses: doc.buses,
        branches: doc.branches,
    };
    case.validate()?;
    if let Some(s) = &doc.scenario {
        s.validate()?;
    }
    Ok((case, doc.scenario))
}

pub fn load_case_native(text: &str) -> Result<NetworkCase> {
    load_native_document(text).map(|(case, _)| case)
}

pub fn serialize_case_native(case: &NetworkCase) -> String {
    let doc = Document {
        meta: Meta {
            name: case.name.clone(),
            base_mva: case.base_mva,
            base_kv: case.base_kv,
            slack_id: case.slack.id,
            slack_v0_re: case.slack.v0.re,
            slack_v0_im: case.slack.v0.im,
        },
        buses: case.buses.clone(),
        branches: case.branches.clone(),
        scenario: None,
    };
    toml::to_string(&doc).expect("case documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
[meta]
name = "tiny"
base_mva = 10.0
slack_id = 0

[[buses]]
id = 0
load_P = [0.0, 0.0]
load_I = [0.0, 0.0]
load_Z = [0.0, 0.0]
shunt = [0.0, 0.0]

[[buses]]
id = 1
load_P = [0.01, 0.005]
load_I = [0.0, 0.0]
load_Z = [0.0, 0.0]
shunt = [0.0, 0.0]

[[branches]]
from = 0
to = 1
series_impedance = [0.01, 0.02]
total_charging = [0.0, 0.0]
"#;

    #[test]
    fn loads_minimal_document() {
        let c = load_case_native(DOC).unwrap();
        assert_eq!(c.slack.v0, C64::new(1.0, 0.0));
        assert_eq!(c.buses[1].load_p, C64::new(0.01, 0.005));
        assert!(c.branches[0].in_service);
    }

    #[test]
    fn round_trip_is_exact() {
        let mut c = load_case_native(DOC).unwrap();
        c.buses[1].load_p = C64::new(0.1 + 0.2, -1.0 / 3.0);
        let back = load_case_native(&serialize_case_native(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_bus_list_is_invalid() {
        let text = r#"
[meta]
name = "empty"
base_mva = 1.0
slack_id = 0
"#;
        assert!(matches!(load_case_native(text), Err(Error::Validation(_))));
    }

    #[test]
    fn schema_violation_is_a_parse_error() {
        let text = DOC.replace("load_P = [0.01, 0.005]", "load_P = \"heavy\"");
        assert!(matches!(load_case_native(&text), Err(Error::Parse { .. })));
    }
}
