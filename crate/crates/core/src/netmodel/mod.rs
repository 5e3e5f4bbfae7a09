//! Network representation, admittance assembly, incidence analysis and ZIP
//! load evaluation.

mod admittance;
mod case;
mod incidence;
mod zip;

pub use admittance::{assemble_admittance, AdmittanceSplit};
pub use case::{Branch, Bus, NetworkCase, NodeMap, Slack};
pub use incidence::{build_incidence, classify_topology, IncidenceStructure, Topology};
pub use zip::{zip_current_injection, LoadModel, ShuntHandling, ZipScale};
