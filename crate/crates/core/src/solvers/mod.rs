//! HELM with pluggable Step-4 backends, and the baseline load-flow methods.
//!
//! Every method goes through [`prepare`] (ordering, factorizations, operator
//! construction) and then [`Prepared::run`], which only executes the main
//! loop. The split lets the benchmark time the loop alone.

mod backend;
mod fixed_point;
mod helm;
mod mismatch;
mod newton;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use backend::{
    prepare_dlf_backend, prepare_lu_backend, prepare_sweep_backend, DlfOperator, Scratch, Step4Backend,
    SweepSchedule, Variant, DLF_DENSE_THRESHOLD,
};
pub use mismatch::power_mismatch;

use crate::error::{Error, Result};
use crate::netmodel::{
    assemble_admittance, build_incidence, AdmittanceSplit, IncidenceStructure, LoadModel, NetworkCase,
    NodeMap, ShuntHandling, ZipScale,
};
use crate::series::EmbeddingData;
use crate::sparse::{CscMatrix, SparseLu};
use crate::C64;

/// Source of elapsed time for step instrumentation.
pub trait Clock {
    fn now(&self) -> Duration;
}

/// Wall-clock time from a monotonic origin.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    #[inline]
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// Always reads zero; for targets without a usable timer.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    #[inline]
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "helm-lu")]
    HelmLu,
    #[serde(rename = "s-helm")]
    SHelm,
    #[serde(rename = "d-helm")]
    DHelm,
    #[serde(rename = "bfs")]
    Bfs,
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "zbus")]
    ZBus,
    #[serde(rename = "nr")]
    Nr,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::HelmLu,
        Method::SHelm,
        Method::DHelm,
        Method::Bfs,
        Method::Direct,
        Method::ZBus,
        Method::Nr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::HelmLu => "helm-lu",
            Method::SHelm => "s-helm",
            Method::DHelm => "d-helm",
            Method::Bfs => "bfs",
            Method::Direct => "direct",
            Method::ZBus => "zbus",
            Method::Nr => "nr",
        }
    }

    pub fn helm_variant(self) -> Option<Variant> {
        match self {
            Method::HelmLu => Some(Variant::Lu),
            Method::SHelm => Some(Variant::Sweep),
            Method::DHelm => Some(Variant::Dlf),
            _ => None,
        }
    }

    pub fn is_helm(self) -> bool {
        self.helm_variant().is_some()
    }

    pub fn requires_radial(self) -> bool {
        matches!(self, Method::SHelm | Method::Bfs)
    }

    fn default_shunts(self) -> ShuntHandling {
        match self {
            Method::ZBus => ShuntHandling::Matrix,
            _ => ShuntHandling::Current,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Usage(format!(
                    "unknown method `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    NoSolutionDetected,
    Inconclusive,
    Diverged,
    IterationLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Converged => "converged",
            Status::NoSolutionDetected => "no-solution",
            Status::Inconclusive => "inconclusive",
            Status::Diverged => "diverged",
            Status::IterationLimit => "iteration-limit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OrderTiming {
    pub steps23: Duration,
    pub step4: Duration,
    pub step5: Duration,
}

/// Time spent per algorithm step. HELM fills the step fields and
/// `per_order`; the baselines fill `per_iteration`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepTimings {
    pub steps23: Duration,
    pub step4: Duration,
    pub step5: Duration,
    pub total: Duration,
    pub per_order: Vec<OrderTiming>,
    pub per_iteration: Vec<Duration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub status: Status,
    /// Slack first, then PQ nodes, in [`NodeMap`] order.
    pub voltages: Vec<C64>,
    pub node_ids: Vec<usize>,
    pub orders_or_iterations: usize,
    /// Largest complex power residual at a PQ node, p.u.
    pub max_mismatch: f64,
    pub timings: StepTimings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.voltages.iter().map(|v| v.norm()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when successive estimates differ by less than this.
    pub eps: f64,
    pub max_order: usize,
    pub max_iter: usize,
    /// Power residual required before a result is reported as converged.
    pub mismatch_tol: f64,
    pub divergence_guard: f64,
    /// Number of trailing HELM estimates inspected for oscillation.
    pub window: usize,
    pub dlf_dense_threshold: usize,
    /// Overrides the per-method placement of ground admittances in the
    /// fixed-point baselines.
    pub shunts: Option<ShuntHandling>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-6,
            max_order: 60,
            max_iter: 200,
            mismatch_tol: 1e-8,
            divergence_guard: 1e6,
            window: 5,
            dlf_dense_threshold: DLF_DENSE_THRESHOLD,
            shunts: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Usage(format!(
                "tolerance must be positive, got {}",
                self.eps
            )));
        }
        if self.max_order == 0 || self.max_iter == 0 {
            return Err(Error::Usage(
                "order and iteration limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Network data shared by every method.
#[derive(Debug, Clone)]
pub struct Model {
    pub nodes: NodeMap,
    pub v0: C64,
    pub admittance: AdmittanceSplit,
    pub incidence: IncidenceStructure,
    pub loads: LoadModel,
    pub embedding: EmbeddingData,
}

impl Model {
    pub fn new(case: &NetworkCase) -> Result<Self> {
        let admittance = assemble_admittance(case)?;
        let incidence = build_incidence(case)?;
        let nodes = admittance.nodes.clone();
        let loads = LoadModel::from_case(case, &nodes);
        let embedding = EmbeddingData::from_loads(&loads, ZipScale::UNIT);
        Ok(Model {
            nodes,
            v0: case.slack.v0,
            admittance,
            incidence,
            loads,
            embedding,
        })
    }

    pub fn n_pq(&self) -> usize {
        self.nodes.n_pq()
    }

    fn mismatch(&self, v_pq: &[C64], full: &mut Vec<C64>) -> f64 {
        full.clear();
        full.push(self.v0);
        full.extend_from_slice(v_pq);
        power_mismatch(&self.admittance.y_full, &self.loads, full)
    }

    fn report(
        &self,
        method: Method,
        status: Status,
        v_pq: &[C64],
        count: usize,
        timings: StepTimings,
        detail: Option<String>,
    ) -> SolveReport {
        let mut voltages = Vec::with_capacity(v_pq.len() + 1);
        voltages.push(self.v0);
        voltages.extend_from_slice(v_pq);
        let max_mismatch = power_mismatch(&self.admittance.y_full, &self.loads, &voltages);
        SolveReport {
            method,
            status,
            voltages,
            node_ids: self.nodes.ids().to_vec(),
            orders_or_iterations: count,
            max_mismatch,
            timings,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Helm(Step4Backend),
    Bfs(SweepSchedule),
    Direct {
        op: DlfOperator,
        handling: ShuntHandling,
    },
    ZBus {
        lu: SparseLu<C64>,
        slack_column: Vec<C64>,
        handling: ShuntHandling,
    },
    Nr {
        order: Vec<usize>,
    },
}

/// A method with all preprocessing done.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub method: Method,
    pub config: SolverConfig,
    pub model: Model,
    kind: Kind,
}

pub fn prepare(case: &NetworkCase, method: Method, config: &SolverConfig) -> Result<Prepared> {
    prepare_model(Model::new(case)?, method, config)
}

pub fn prepare_model(model: Model, method: Method, config: &SolverConfig) -> Result<Prepared> {
    config.validate()?;
    let inc = &model.incidence;
    if method.requires_radial() && inc.topology != crate::netmodel::Topology::Radial {
        return Err(Error::Topology(format!(
            "{method} needs a radial network; this one is weakly meshed"
        )));
    }
    let handling = config.shunts.unwrap_or(method.default_shunts());
    let kind = match method {
        Method::HelmLu => Kind::Helm(prepare_lu_backend(&model.admittance.y_series_pq)?),
        Method::SHelm => Kind::Helm(prepare_sweep_backend(inc)?),
        Method::DHelm => Kind::Helm(prepare_dlf_backend(inc, config.dlf_dense_threshold)?),
        Method::Bfs => {
            if handling == ShuntHandling::Matrix {
                return Err(Error::Usage(
                    "bfs carries ground admittances as currents; matrix folding is not available".into(),
                ));
            }
            Kind::Bfs(SweepSchedule::new(inc)?)
        }
        Method::Direct => {
            let m = match handling {
                ShuntHandling::Current => inc.reduced_series_matrix(),
                ShuntHandling::Matrix => with_diagonal(&inc.reduced_series_matrix(), &model.shunt_pq()),
            };
            Kind::Direct {
                op: DlfOperator::from_matrix(&m, config.dlf_dense_threshold)?,
                handling,
            }
        }
        Method::ZBus => {
            let (m, slack_column) = match handling {
                ShuntHandling::Matrix => (
                    &model.admittance.y_full_pq,
                    model.admittance.y_full_slack_column.clone(),
                ),
                ShuntHandling::Current => (
                    &model.admittance.y_series_pq,
                    model.admittance.y_slack_column.clone(),
                ),
            };
            Kind::ZBus {
                lu: SparseLu::factor(m)?,
                slack_column,
                handling,
            }
        }
        Method::Nr => Kind::Nr {
            order: newton::jacobian_order(&model),
        },
    };
    Ok(Prepared {
        method,
        config: *config,
        model,
        kind,
    })
}

fn with_diagonal(m: &CscMatrix<C64>, d: &[C64]) -> CscMatrix<C64> {
    let mut trip = m.triplets();
    trip.extend(d.iter().enumerate().map(|(i, &y)| (i, i, y)));
    CscMatrix::from_triplets(m.nrows(), m.ncols(), &trip)
}

impl Model {
    /// Ground admittance per PQ node (fixed shunts, charging, Z loads).
    pub fn shunt_pq(&self) -> Vec<C64> {
        self.embedding.y_shunt.clone()
    }
}

impl Prepared {
    /// The Step-4 backend of a HELM method.
    pub fn backend(&self) -> Option<&Step4Backend> {
        match &self.kind {
            Kind::Helm(b) => Some(b),
            _ => None,
        }
    }

    /// Runs the main loop, timing steps with `clock`.
    pub fn run<C: Clock>(&self, clock: &C) -> Result<SolveReport> {
        match &self.kind {
            Kind::Helm(backend) => helm::run(self, backend, clock),
            Kind::Bfs(sweep) => fixed_point::run_bfs(self, sweep, clock),
            Kind::Direct { op, handling } => fixed_point::run_direct(self, op, *handling, clock),
            Kind::ZBus {
                lu,
                slack_column,
                handling,
            } => fixed_point::run_zbus(self, lu, slack_column, *handling, clock),
            Kind::Nr { order } => newton::run(self, order, clock),
        }
    }
}

pub fn solve(case: &NetworkCase, method: Method, config: &SolverConfig) -> Result<SolveReport> {
    prepare(case, method, config)?.run(&MonotonicClock::new())
}

pub fn solve_helm(case: &NetworkCase, variant: Variant, config: &SolverConfig) -> Result<SolveReport> {
    let method = match variant {
        Variant::Lu => Method::HelmLu,
        Variant::Sweep => Method::SHelm,
        Variant::Dlf => Method::DHelm,
    };
    solve(case, method, config)
}

pub fn solve_bfs(case: &NetworkCase, config: &SolverConfig) -> Result<SolveReport> {
    solve(case, Method::Bfs, config)
}

pub fn solve_direct(case: &NetworkCase, config: &SolverConfig) -> Result<SolveReport> {
    solve(case, Method::Direct, config)
}

pub fn solve_implicit_z(case: &NetworkCase, config: &SolverConfig) -> Result<SolveReport> {
    solve(case, Method::ZBus, config)
}

pub fn solve_newton_raphson(case: &NetworkCase, config: &SolverConfig) -> Result<SolveReport> {
    solve(case, Method::Nr, config)
}

/// Coefficient table `v[0..=orders]` produced by a HELM backend, without
/// continuation. Used to compare backends order by order.
pub fn series_coefficients(prepared: &Prepared, orders: usize) -> Result<Vec<Vec<C64>>> {
    let backend = prepared
        .backend()
        .ok_or_else(|| Error::Usage(format!("{} has no series", prepared.method)))?;
    let m = &prepared.model;
    let mut state = crate::series::SeriesState::germ(m.n_pq(), m.v0)?;
    let mut scratch = backend.scratch();
    for _ in 0..orders {
        state.advance(backend, &m.embedding, &mut scratch)?;
    }
    Ok(state.v)
}
