//! Case and scenario readers.

mod matpower;
mod native;
mod scenario;

use std::path::Path;

pub use matpower::parse_matpower_case;
pub use native::{load_case_native, load_native_document, serialize_case_native};
pub use scenario::{apply_scenario, load_scenario, serialize_scenario, Scenario};

use crate::error::{Error, Result};
use crate::netmodel::NetworkCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFormat {
    Matpower,
    Native,
}

impl CaseFormat {
    /// Guesses the format from a file extension (`.m` or `.toml`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "m" => Some(CaseFormat::Matpower),
            "toml" => Some(CaseFormat::Native),
            _ => None,
        }
    }
}

impl std::str::FromStr for CaseFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mat" | "matpower" => Ok(CaseFormat::Matpower),
            "native" | "toml" => Ok(CaseFormat::Native),
            other => Err(Error::Usage(format!("unknown case format `{other}`"))),
        }
    }
}

pub fn parse_case(text: &str, format: CaseFormat) -> Result<NetworkCase> {
    match format {
        CaseFormat::Matpower => parse_matpower_case(text),
        CaseFormat::Native => load_case_native(text),
    }
}

/// Reads a case file, applying any scenario embedded in a native document.
pub fn read_case(path: &Path, format: Option<CaseFormat>) -> Result<NetworkCase> {
    let format = format.or_else(|| CaseFormat::from_path(path)).ok_or_else(|| {
        Error::Usage(format!(
            "cannot infer the format of {}; pass it explicitly",
            path.display()
        ))
    })?;
    let text = std::fs::read_to_string(path)?;
    match format {
        CaseFormat::Matpower => parse_matpower_case(&text),
        CaseFormat::Native => {
            let (case, scenario) = load_native_document(&text)?;
            match scenario {
                Some(s) => apply_scenario(&case, &s),
                None => Ok(case),
            }
        }
    }
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    load_scenario(&std::fs::read_to_string(path)?)
}
