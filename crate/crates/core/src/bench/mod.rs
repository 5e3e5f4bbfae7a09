//! Timing harness for the main loops of every method.
//!
//! Preparation (admittance assembly, orderings, factorizations, operator
//! construction) happens before the timed region. Each repetition times one
//! call of [`Prepared::run`], and HELM runs additionally record per-step
//! durations through the same clock.

mod report;

use std::cell::Cell;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use report::{emit_report, emit_solve_report, exit_code};

use crate::error::{Error, Result};
use crate::netmodel::NetworkCase;
use crate::solvers::{prepare_model, Clock, Method, Model, OrderTiming, SolveReport, SolverConfig, Status};
use crate::sparse::factorization_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Usage(format!(
                "unknown output format `{other}` (expected table, json or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub warmup: usize,
    pub solver: SolverConfig,
    pub parallel_step5: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: Method::ALL.to_vec(),
            repetitions: 1000,
            warmup: 10,
            solver: SolverConfig::default(),
            parallel_step5: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Usage("no methods requested".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Usage("repetitions must be at least 1".into()));
        }
        self.solver.validate()
    }
}

/// Mean seconds spent per solve in each HELM step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepBreakdown {
    pub steps23: f64,
    pub step4: f64,
    pub step5: f64,
    /// Loop time outside the three steps.
    pub overhead: f64,
}

impl StepBreakdown {
    /// Percentages of the three steps relative to their sum.
    pub fn shares(&self) -> StepShares {
        let sum = self.steps23 + self.step4 + self.step5;
        if sum <= 0.0 {
            return StepShares {
                steps23: 0.0,
                step4: 0.0,
                step5: 0.0,
            };
        }
        StepShares {
            steps23: 100.0 * self.steps23 / sum,
            step4: 100.0 * self.step4 / sum,
            step5: 100.0 * self.step5 / sum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepShares {
    pub steps23: f64,
    pub step4: f64,
    pub step5: f64,
}

/// Loop time if each order's convergence check ran concurrently with the
/// next order's Steps 2–4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelProjection {
    pub original: f64,
    pub adjusted: f64,
}

/// Projects a HELM run onto a schedule where Step 5 of order `k` overlaps
/// Steps 2–4 of order `k + 1`. Only the part of Step 5 longer than the work
/// it overlaps stays exposed; the last order is compared with its own
/// Steps 2–4. `total` is the measured loop time and keeps its overhead.
pub fn parallel_step5_projection(per_order: &[OrderTiming], total: Duration) -> ParallelProjection {
    let secs = |d: Duration| d.as_secs_f64();
    let mut hidden = 0.0;
    for (k, o) in per_order.iter().enumerate() {
        let next = per_order.get(k + 1).unwrap_or(o);
        let cover = secs(next.steps23) + secs(next.step4);
        hidden += secs(o.step5).min(cover);
    }
    let original = secs(total);
    ParallelProjection {
        original,
        adjusted: original - hidden,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: Method,
    pub status: Status,
    pub orders_or_iterations: usize,
    pub samples: usize,
    /// Main-loop seconds per solve.
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max_mismatch: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<StepBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<StepShares>,
    /// `1 − step4 / step4(helm-lu)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step4_savings: Option<f64>,
    /// `1 − mean / mean(helm-lu)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_savings: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<ParallelProjection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel_savings: Option<f64>,
    /// LU factorizations performed inside the timed region, all repetitions.
    pub timed_factorizations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageDiscrepancy {
    /// Largest voltage-magnitude difference over nodes and method pairs.
    pub max_abs_diff: f64,
    pub compared: Vec<Method>,
    pub excluded: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub case: String,
    pub nodes: usize,
    pub repetitions: usize,
    pub warmup: usize,
    pub methods: Vec<MethodStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<VoltageDiscrepancy>,
}

impl BenchReport {
    pub fn get(&self, method: Method) -> Option<&MethodStats> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn statuses(&self) -> Vec<Status> {
        self.methods.iter().map(|m| m.status).collect()
    }
}

/// Maximum voltage-magnitude difference among converged reports.
pub fn compare_voltages(reports: &[SolveReport]) -> Result<VoltageDiscrepancy> {
    let (ok, bad): (Vec<&SolveReport>, Vec<&SolveReport>) = reports.iter().partition(|r| r.converged());
    if ok.len() < 2 {
        return Err(Error::InsufficientResults(format!(
            "{} converged result(s); need at least 2 to compare",
            ok.len()
        )));
    }
    let n = ok[0].voltages.len();
    if ok.iter().any(|r| r.voltages.len() != n) {
        return Err(Error::Precondition("reports cover different networks".into()));
    }
    let mut worst: f64 = 0.0;
    for (a, ra) in ok.iter().enumerate() {
        for rb in &ok[a + 1..] {
            for (x, y) in ra.voltages.iter().zip(&rb.voltages) {
                worst = worst.max((x.norm() - y.norm()).abs());
            }
        }
    }
    Ok(VoltageDiscrepancy {
        max_abs_diff: worst,
        compared: ok.iter().map(|r| r.method).collect(),
        excluded: bad.iter().map(|r| r.method).collect(),
    })
}

/// A clock that advances by a fixed step on every reading.
#[derive(Debug)]
pub struct SteppingClock {
    now: Cell<Duration>,
    step: Duration,
}

impl SteppingClock {
    pub fn new(step: Duration) -> Self {
        SteppingClock {
            now: Cell::new(Duration::ZERO),
            step,
        }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> Duration {
        let t = self.now.get();
        self.now.set(t + self.step);
        t
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

struct Run {
    stats: MethodStats,
    report: SolveReport,
    step4_mean: f64,
    mean_orders: Vec<OrderTiming>,
    mean_total: Duration,
}

fn bench_method<C: Clock>(model: &Model, method: Method, cfg: &BenchConfig, clock: &C) -> Result<Run> {
    let prepared = prepare_model(model.clone(), method, &cfg.solver).map_err(|e| match e {
        Error::Topology(msg) => Error::Topology(format!("{method}: {msg}")),
        other => other,
    })?;
    for _ in 0..cfg.warmup {
        prepared.run(clock)?;
    }
    let mut samples = Vec::with_capacity(cfg.repetitions);
    let (mut s23, mut s4, mut s5, mut total) = (0.0, 0.0, 0.0, 0.0);
    let mut order_sums: Vec<OrderTiming> = Vec::new();
    let mut timed_factorizations = 0;
    let mut last = None;
    for _ in 0..cfg.repetitions {
        let f0 = factorization_count();
        let t0 = clock.now();
        let report = prepared.run(clock)?;
        let t1 = clock.now();
        timed_factorizations += factorization_count() - f0;
        samples.push((t1 - t0).as_secs_f64());
        let t = &report.timings;
        s23 += t.steps23.as_secs_f64();
        s4 += t.step4.as_secs_f64();
        s5 += t.step5.as_secs_f64();
        total += t.total.as_secs_f64();
        if order_sums.len() < t.per_order.len() {
            order_sums.resize(t.per_order.len(), OrderTiming::default());
        }
        for (acc, o) in order_sums.iter_mut().zip(&t.per_order) {
            acc.steps23 += o.steps23;
            acc.step4 += o.step4;
            acc.step5 += o.step5;
        }
        last = Some(report);
    }
    let report = last.expect("at least one repetition");
    let reps = cfg.repetitions as f64;
    let mean = samples.iter().sum::<f64>() / reps;
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let steps = method.is_helm().then(|| StepBreakdown {
        steps23: s23 / reps,
        step4: s4 / reps,
        step5: s5 / reps,
        overhead: ((total - s23 - s4 - s5) / reps).max(0.0),
    });
    let div = cfg.repetitions as u32;
    let mean_orders = order_sums
        .iter()
        .map(|o| OrderTiming {
            steps23: o.steps23 / div,
            step4: o.step4 / div,
            step5: o.step5 / div,
        })
        .collect();
    let stats = MethodStats {
        method,
        status: report.status,
        orders_or_iterations: report.orders_or_iterations,
        samples: cfg.repetitions,
        mean,
        median: median(&sorted),
        min: sorted[0],
        max_mismatch: report.max_mismatch,
        steps,
        shares: steps.map(|s| s.shares()),
        step4_savings: None,
        total_savings: None,
        parallel: None,
        parallel_savings: None,
        timed_factorizations,
    };
    Ok(Run {
        stats,
        report,
        step4_mean: s4 / reps,
        mean_orders,
        mean_total: Duration::from_secs_f64(total / reps),
    })
}

/// Runs every requested method on `case` and aggregates timing statistics.
pub fn run_benchmark<C: Clock>(case: &NetworkCase, cfg: &BenchConfig, clock: &C) -> Result<BenchReport> {
    cfg.validate()?;
    let model = Model::new(case)?;
    let runs = cfg
        .methods
        .iter()
        .map(|&m| bench_method(&model, m, cfg, clock))
        .collect::<Result<Vec<_>>>()?;
    let lu = runs.iter().find(|r| r.stats.method == Method::HelmLu);
    let lu_parallel = lu.map(|r| parallel_step5_projection(&r.mean_orders, r.mean_total));
    let mut methods = Vec::with_capacity(runs.len());
    for run in &runs {
        let mut s = run.stats.clone();
        if s.method.is_helm() {
            if cfg.parallel_step5 {
                s.parallel = Some(parallel_step5_projection(&run.mean_orders, run.mean_total));
            }
            if let Some(lu) = lu {
                if lu.step4_mean > 0.0 {
                    s.step4_savings = Some(1.0 - run.step4_mean / lu.step4_mean);
                }
                if lu.stats.mean > 0.0 {
                    s.total_savings = Some(1.0 - s.mean / lu.stats.mean);
                }
                if let (Some(p), Some(lp)) = (s.parallel, lu_parallel) {
                    if lp.adjusted > 0.0 {
                        s.parallel_savings = Some(1.0 - p.adjusted / lp.adjusted);
                    }
                }
            }
        }
        methods.push(s);
    }
    let reports: Vec<SolveReport> = runs.into_iter().map(|r| r.report).collect();
    Ok(BenchReport {
        case: case.name.clone(),
        nodes: case.buses.len(),
        repetitions: cfg.repetitions,
        warmup: cfg.warmup,
        methods,
        discrepancy: compare_voltages(&reports).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ot(a: u64, b: u64, c: u64) -> OrderTiming {
        OrderTiming {
            steps23: Duration::from_secs(a),
            step4: Duration::from_secs(b),
            step5: Duration::from_secs(c),
        }
    }

    #[test]
    fn projection_without_step5_is_identity() {
        let orders = vec![ot(1, 1, 0); 4];
        let p = parallel_step5_projection(&orders, Duration::from_secs(9));
        assert_eq!(p.adjusted, p.original);
    }

    #[test]
    fn projection_hides_two_of_ten_per_order() {
        let orders = vec![ot(1, 1, 10); 5];
        let p = parallel_step5_projection(&orders, Duration::from_secs(60));
        assert_eq!(p.original, 60.0);
        assert_eq!(p.adjusted, 50.0);
    }

    #[test]
    fn projection_fully_hides_short_checks() {
        let orders = vec![ot(2, 3, 1), ot(2, 3, 4), ot(2, 3, 1)];
        let p = parallel_step5_projection(&orders, Duration::from_secs(21));
        assert_eq!(p.adjusted, 15.0);
    }

    #[test]
    fn stepping_clock_is_deterministic() {
        let c = SteppingClock::new(Duration::from_nanos(5));
        assert_eq!(c.now(), Duration::ZERO);
        assert_eq!(c.now(), Duration::from_nanos(5));
    }

    #[test]
    fn shares_sum_to_hundred() {
        let s = StepBreakdown {
            steps23: 0.3,
            step4: 1.1,
            step5: 0.7,
            overhead: 0.2,
        }
        .shares();
        assert!((s.steps23 + s.step4 + s.step5 - 100.0).abs() < 1e-12);
    }

    #[test]
    fn empty_method_list_is_a_usage_error() {
        let cfg = BenchConfig {
            methods: vec![],
            ..BenchConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Usage(_))));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<OutputFormat>(), Err(Error::Usage(_))));
    }
}
