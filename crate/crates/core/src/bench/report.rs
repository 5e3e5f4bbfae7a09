use std::fmt::Write as _;

use serde::Serialize;

use crate::bench::{BenchReport, OutputFormat};
use crate::error::{Error, Result};
use crate::solvers::{SolveReport, Status};

/// Process exit status for a set of outcomes: 0 when everything converged,
/// 2 when a method diverged or hit its iteration limit, 3 when HELM reported
/// no solution or ran out of terms.
pub fn exit_code(statuses: &[Status]) -> i32 {
    if statuses
        .iter()
        .any(|s| matches!(s, Status::Diverged | Status::IterationLimit))
    {
        2
    } else if statuses
        .iter()
        .any(|s| matches!(s, Status::NoSolutionDetected | Status::Inconclusive))
    {
        3
    } else {
        0
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Validation(format!("csv output: {e}"))
}

fn opt(v: Option<f64>, scale: f64, digits: usize) -> String {
    v.map(|x| format!("{:.*}", digits, x * scale))
        .unwrap_or_else(|| "-".into())
}

#[derive(Serialize)]
struct BenchRow<'a> {
    case: &'a str,
    method: &'a str,
    status: String,
    orders_or_iterations: usize,
    samples: usize,
    mean_s: f64,
    median_s: f64,
    min_s: f64,
    max_mismatch: f64,
    steps23_s: Option<f64>,
    step4_s: Option<f64>,
    step5_s: Option<f64>,
    overhead_s: Option<f64>,
    steps23_pct: Option<f64>,
    step4_pct: Option<f64>,
    step5_pct: Option<f64>,
    step4_savings: Option<f64>,
    total_savings: Option<f64>,
    parallel_adjusted_s: Option<f64>,
    parallel_savings: Option<f64>,
    timed_factorizations: u64,
}

pub fn emit_report(report: &BenchReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report).expect("report serializes")),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for m in &report.methods {
                w.serialize(BenchRow {
                    case: &report.case,
                    method: m.method.name(),
                    status: m.status.to_string(),
                    orders_or_iterations: m.orders_or_iterations,
                    samples: m.samples,
                    mean_s: m.mean,
                    median_s: m.median,
                    min_s: m.min,
                    max_mismatch: m.max_mismatch,
                    steps23_s: m.steps.map(|s| s.steps23),
                    step4_s: m.steps.map(|s| s.step4),
                    step5_s: m.steps.map(|s| s.step5),
                    overhead_s: m.steps.map(|s| s.overhead),
                    steps23_pct: m.shares.map(|s| s.steps23),
                    step4_pct: m.shares.map(|s| s.step4),
                    step5_pct: m.shares.map(|s| s.step5),
                    step4_savings: m.step4_savings,
                    total_savings: m.total_savings,
                    parallel_adjusted_s: m.parallel.map(|p| p.adjusted),
                    parallel_savings: m.parallel_savings,
                    timed_factorizations: m.timed_factorizations,
                })
                .map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(csv_error)?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
        OutputFormat::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "case {} ({} nodes), {} repetitions after {} warmup",
                report.case, report.nodes, report.repetitions, report.warmup
            );
            let _ = writeln!(
                out,
                "{:<8} {:<15} {:>5} {:>11} {:>11} {:>11} {:>7} {:>7} {:>7} {:>9} {:>9} {:>11}",
                "method",
                "status",
                "n",
                "mean(us)",
                "median(us)",
                "min(us)",
                "S2-3%",
                "S4%",
                "S5%",
                "S4 save%",
                "save%",
                "par.save%"
            );
            for m in &report.methods {
                let _ = writeln!(
                    out,
                    "{:<8} {:<15} {:>5} {:>11.3} {:>11.3} {:>11.3} {:>7} {:>7} {:>7} {:>9} {:>9} {:>11}",
                    m.method.name(),
                    m.status.to_string(),
                    m.orders_or_iterations,
                    m.mean * 1e6,
                    m.median * 1e6,
                    m.min * 1e6,
                    opt(m.shares.map(|s| s.steps23), 1.0, 1),
                    opt(m.shares.map(|s| s.step4), 1.0, 1),
                    opt(m.shares.map(|s| s.step5), 1.0, 1),
                    opt(m.step4_savings, 100.0, 1),
                    opt(m.total_savings, 100.0, 1),
                    opt(m.parallel_savings, 100.0, 1),
                );
            }
            match &report.discrepancy {
                Some(d) => {
                    let _ = writeln!(
                        out,
                        "max |V| discrepancy over converged methods: {:.3e} p.u.",
                        d.max_abs_diff
                    );
                    if !d.excluded.is_empty() {
                        let names: Vec<&str> = d.excluded.iter().map(|m| m.name()).collect();
                        let _ = writeln!(out, "excluded (not converged): {}", names.join(", "));
                    }
                }
                None => {
                    let _ = writeln!(out, "fewer than two methods converged; no discrepancy");
                }
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct VoltageRow {
    node: usize,
    v_re: f64,
    v_im: f64,
    v_mag: f64,
    v_ang_deg: f64,
}

pub fn emit_solve_report(report: &SolveReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report).expect("report serializes")),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for (id, v) in report.node_ids.iter().zip(&report.voltages) {
                w.serialize(VoltageRow {
                    node: *id,
                    v_re: v.re,
                    v_im: v.im,
                    v_mag: v.norm(),
                    v_ang_deg: v.arg().to_degrees(),
                })
                .map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(csv_error)?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
        OutputFormat::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{}: {} after {} step(s), max mismatch {:.3e} p.u., {:.3} us",
                report.method,
                report.status,
                report.orders_or_iterations,
                report.max_mismatch,
                report.timings.total.as_secs_f64() * 1e6
            );
            if let Some(d) = &report.detail {
                let _ = writeln!(out, "{d}");
            }
            let _ = writeln!(out, "{:>6} {:>14} {:>12}", "node", "|V| (p.u.)", "angle (deg)");
            for (id, v) in report.node_ids.iter().zip(&report.voltages) {
                let _ = writeln!(
                    out,
                    "{:>6} {:>14.10} {:>12.6}",
                    id,
                    v.norm(),
                    v.arg().to_degrees()
                );
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&[Status::Converged, Status::Converged]), 0);
        assert_eq!(exit_code(&[Status::Converged, Status::IterationLimit]), 2);
        assert_eq!(exit_code(&[Status::NoSolutionDetected]), 3);
        assert_eq!(exit_code(&[Status::Inconclusive, Status::Diverged]), 2);
    }
}
