use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use radial_helm::bench::{
    compare_voltages, emit_report, emit_solve_report, exit_code, run_benchmark, BenchConfig, OutputFormat,
};
use radial_helm::ingest::{apply_scenario, read_case, read_scenario, CaseFormat};
use radial_helm::netmodel::{assemble_admittance, build_incidence, NetworkCase, Topology};
use radial_helm::solvers::{
    prepare_dlf_backend, prepare_lu_backend, prepare_sweep_backend, solve, Method, MonotonicClock,
    SolverConfig, DLF_DENSE_THRESHOLD,
};
use radial_helm::C64;

const INPUT_ERROR: u8 = 4;

/// Holomorphic embedding load flow for distribution feeders.
#[derive(Parser)]
#[command(name = "radial-helm", version)]
struct Cli {
    /// Directory searched for case and scenario paths that do not exist as given.
    #[arg(long, env = "RADIAL_HELM_SEED_CASES", global = true)]
    cases_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case with one method and print the voltages.
    Solve(SolveArgs),
    /// Time the main loop of several methods.
    Bench(BenchArgs),
    /// Solve with several methods and report the voltage discrepancy.
    Compare(CompareArgs),
    /// Parse a case and report its topology and structural invariants.
    Check(CaseArgs),
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long)]
    case: PathBuf,
    /// `mat` or `native`; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<CaseFormat>,
    /// Scenario file applied on top of the case.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long)]
    method: Method,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 60)]
    max_order: usize,
    #[arg(long, default_value = "table")]
    output: OutputFormat,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Comma-separated method names.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "helm-lu,s-helm,d-helm,bfs,direct,zbus,nr"
    )]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    /// Also report the projected loop time with Step 5 overlapped.
    #[arg(long)]
    parallel_step5: bool,
    /// Explicit DLF matrix up to this many PQ nodes, factored form above.
    #[arg(long, default_value_t = DLF_DENSE_THRESHOLD)]
    dense_threshold: usize,
    #[arg(long, default_value = "table")]
    output: OutputFormat,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "helm-lu,s-helm,d-helm,bfs,direct,zbus,nr"
    )]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

fn resolve(path: &Path, dir: Option<&Path>) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() && !path.exists() => d.join(path),
        _ => path.to_path_buf(),
    }
}

fn load(args: &CaseArgs, dir: Option<&Path>) -> Result<NetworkCase> {
    let path = resolve(&args.case, dir);
    let case = read_case(&path, args.format).with_context(|| format!("reading {}", path.display()))?;
    match &args.scenario {
        None => Ok(case),
        Some(s) => {
            let mut sp = resolve(s, dir);
            if !sp.exists() {
                if let Some(d) = dir {
                    sp = d.join("scenarios").join(s);
                }
            }
            let scenario = read_scenario(&sp).with_context(|| format!("reading {}", sp.display()))?;
            Ok(apply_scenario(&case, &scenario)?)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let dir = cli.cases_dir.as_deref();
    match cli.command {
        Command::Solve(a) => {
            let case = load(&a.case, dir)?;
            let cfg = SolverConfig {
                eps: a.tol,
                max_order: a.max_order,
                ..SolverConfig::default()
            };
            let report = solve(&case, a.method, &cfg)?;
            print!("{}", emit_solve_report(&report, a.output)?);
            Ok(exit_code(&[report.status]) as u8)
        }
        Command::Bench(a) => {
            let case = load(&a.case, dir)?;
            let cfg = BenchConfig {
                methods: a.methods,
                repetitions: a.reps,
                warmup: a.warmup,
                parallel_step5: a.parallel_step5,
                solver: SolverConfig {
                    dlf_dense_threshold: a.dense_threshold,
                    ..SolverConfig::default()
                },
            };
            let report = run_benchmark(&case, &cfg, &MonotonicClock::new())?;
            print!("{}", emit_report(&report, a.output)?);
            Ok(exit_code(&report.statuses()) as u8)
        }
        Command::Compare(a) => {
            let case = load(&a.case, dir)?;
            let cfg = SolverConfig {
                eps: a.tol,
                ..SolverConfig::default()
            };
            let mut reports = Vec::new();
            for m in a.methods {
                let r = solve(&case, m, &cfg)?;
                println!(
                    "{:<8} {:<20} {:>4} step(s)",
                    m.name(),
                    r.status.to_string(),
                    r.orders_or_iterations
                );
                reports.push(r);
            }
            let d = compare_voltages(&reports)?;
            if !d.excluded.is_empty() {
                let names: Vec<&str> = d.excluded.iter().map(|m| m.name()).collect();
                println!("excluded (not converged): {}", names.join(", "));
            }
            let verdict = if d.max_abs_diff < a.tol {
                "within"
            } else {
                "exceeds"
            };
            println!(
                "max |V| difference {:.3e} p.u. ({verdict} {:e})",
                d.max_abs_diff, a.tol
            );
            let statuses: Vec<_> = reports.iter().map(|r| r.status).collect();
            Ok(exit_code(&statuses) as u8)
        }
        Command::Check(a) => check(&load(&a, dir)?),
    }
}

fn check(case: &NetworkCase) -> Result<u8> {
    let inc = build_incidence(case)?;
    let split = assemble_admittance(case)?;
    let zero = C64::new(0.0, 0.0);
    let count = |f: &dyn Fn(&radial_helm::netmodel::Bus) -> bool| case.buses.iter().filter(|b| f(b)).count();

    println!("case      {}", case.name);
    println!(
        "buses     {} (slack {}, V0 = {:.6}∠{:.4}°)",
        case.buses.len(),
        case.slack.id,
        case.slack.v0.norm(),
        case.slack.v0.arg().to_degrees()
    );
    println!("branches  {} in service", inc.n_branches());
    let topo = match inc.topology {
        Topology::Radial => "radial".to_string(),
        Topology::WeaklyMeshed => format!("weakly meshed ({} loop(s))", inc.n_branches() - inc.n_pq),
    };
    println!("topology  {topo}");
    println!(
        "loads     {} constant-power, {} constant-current, {} constant-impedance, {} shunt",
        count(&|b| b.load_p != zero),
        count(&|b| b.load_i != zero),
        count(&|b| b.load_z != zero),
        count(&|b| b.shunt != zero)
    );

    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "ok  " } else { "FAIL" });
    };

    let scale = split.y_series.max_abs();
    let row_sum = split
        .y_series
        .to_dense()
        .iter()
        .map(|row| row.iter().sum::<C64>().norm())
        .fold(0.0, f64::max);
    report(
        "series rows sum to zero",
        row_sum <= 1e-12 * scale,
        format!("{:.2e} relative", row_sum / scale),
    );

    let ytilde = inc.reduced_series_matrix();
    let rhs: Vec<C64> = (0..inc.n_pq)
        .map(|k| C64::new(1.0, -0.5 * (k % 3) as f64))
        .collect();
    match prepare_lu_backend(&ytilde) {
        Err(e) => report("reduced matrix factors", false, e.to_string()),
        Ok(lu) => {
            let x = lu.solve_order(&rhs);
            let r = ytilde.mul_vec(&x);
            let res = max_abs_diff(&r, &rhs) / (ytilde.max_abs() * max_norm(&x) + max_norm(&rhs));
            report(
                "reduced matrix factors",
                res < 1e-12,
                format!("backward error {res:.2e}"),
            );
            let dlf = prepare_dlf_backend(&inc, DLF_DENSE_THRESHOLD)?.solve_order(&rhs);
            let d = max_rel(&dlf, &x);
            report("DLF matches LU", d < 1e-10, format!("{d:.2e} relative"));
            if inc.topology == Topology::Radial {
                let sweep = prepare_sweep_backend(&inc)?.solve_order(&rhs);
                let d = max_rel(&sweep, &x);
                report("sweep matches LU", d < 1e-10, format!("{d:.2e} relative"));
            }
        }
    }
    Ok(if ok { 0 } else { INPUT_ERROR })
}

fn max_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    max_abs_diff(a, b) / max_norm(b).max(f64::MIN_POSITIVE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
