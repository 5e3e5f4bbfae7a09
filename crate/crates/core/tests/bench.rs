mod common;

use std::time::Duration;

use common::*;
use radial_helm::bench::{
    compare_voltages, emit_report, exit_code, run_benchmark, BenchConfig, BenchReport, OutputFormat,
    SteppingClock,
};
use radial_helm::solvers::{solve, Method, MonotonicClock, SolverConfig, Status};
use radial_helm::Error;

fn cfg(methods: &[Method], reps: usize) -> BenchConfig {
    BenchConfig {
        methods: methods.to_vec(),
        repetitions: reps,
        warmup: 1,
        parallel_step5: true,
        ..BenchConfig::default()
    }
}

#[test]
fn stepping_clock_makes_reports_reproducible() {
    let case = bundled("case33bw.m");
    let c = cfg(&Method::ALL, 3);
    let a = run_benchmark(&case, &c, &SteppingClock::new(Duration::from_micros(1))).unwrap();
    let b = run_benchmark(&case, &c, &SteppingClock::new(Duration::from_micros(1))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stepping_clock_splits_each_order_evenly() {
    let case = bundled("case18.m");
    let r = run_benchmark(
        &case,
        &cfg(&[Method::HelmLu, Method::SHelm, Method::DHelm], 2),
        &SteppingClock::new(Duration::from_micros(1)),
    )
    .unwrap();
    for m in &r.methods {
        let shares = m.shares.unwrap();
        for s in [shares.steps23, shares.step4, shares.step5] {
            assert!((s - 100.0 / 3.0).abs() < 1e-9, "{}", m.method);
        }
        // same order count, same number of ticks
        assert!(m.step4_savings.unwrap().abs() < 1e-12);
    }
}

#[test]
fn step_shares_sum_to_one_hundred() {
    let r = run_benchmark(
        &bundled("case69.m"),
        &cfg(&[Method::HelmLu, Method::SHelm, Method::DHelm], 5),
        &MonotonicClock::new(),
    )
    .unwrap();
    for m in &r.methods {
        let s = m.shares.unwrap();
        assert!((s.steps23 + s.step4 + s.step5 - 100.0).abs() < 1.0);
        assert!(m.min <= m.median && m.min <= m.mean);
    }
}

#[test]
fn preparation_stays_outside_the_timed_region() {
    let r = run_benchmark(
        &bundled("case33bw.m"),
        &cfg(&Method::ALL, 3),
        &MonotonicClock::new(),
    )
    .unwrap();
    for m in &r.methods {
        if m.method == Method::Nr {
            // the Jacobian changes every iteration
            assert!(m.timed_factorizations > 0);
        } else {
            assert_eq!(m.timed_factorizations, 0, "{}", m.method);
        }
    }
}

#[test]
fn single_repetition_still_reports_steps() {
    let r = run_benchmark(
        &bundled("case18.m"),
        &cfg(&Method::ALL, 1),
        &MonotonicClock::new(),
    )
    .unwrap();
    assert_eq!(r.methods.len(), 7);
    for m in &r.methods {
        assert_eq!(m.samples, 1);
        assert_eq!(m.shares.is_some(), m.method.is_helm());
        assert_eq!(m.min, m.mean);
    }
}

#[test]
fn topology_mismatch_names_the_method() {
    let (file, scen) = MESHED[2];
    match run_benchmark(
        &with_scenario(file, scen),
        &cfg(&[Method::SHelm], 1),
        &MonotonicClock::new(),
    ) {
        Err(Error::Topology(msg)) => assert!(msg.starts_with("s-helm")),
        other => panic!("expected topology error, got {other:?}"),
    }
}

#[test]
fn diverged_methods_are_excluded_from_the_discrepancy() {
    let case = with_scenario("case123z.toml", "case123z-z-high");
    let r = run_benchmark(
        &case,
        &cfg(&[Method::SHelm, Method::Bfs, Method::ZBus], 1),
        &MonotonicClock::new(),
    )
    .unwrap();
    let d = r.discrepancy.as_ref().unwrap();
    assert_eq!(d.excluded, vec![Method::Bfs]);
    assert!(d.max_abs_diff < 1e-6);
    assert_eq!(exit_code(&r.statuses()), 2);
}

#[test]
fn comparison_needs_two_converged_results() {
    let case = with_scenario("case123z.toml", "case123z-z-high");
    let bfs = solve(&case, Method::Bfs, &SolverConfig::default()).unwrap();
    let helm = solve(&case, Method::SHelm, &SolverConfig::default()).unwrap();
    assert_eq!(bfs.status, Status::Diverged);
    assert!(matches!(
        compare_voltages(&[bfs.clone(), helm.clone()]),
        Err(Error::InsufficientResults(_))
    ));
    let same = compare_voltages(&[helm.clone(), helm]).unwrap();
    assert_eq!(same.max_abs_diff, 0.0);
}

#[test]
fn report_formats() {
    let r = run_benchmark(
        &bundled("case18.m"),
        &cfg(&Method::ALL, 2),
        &SteppingClock::new(Duration::from_nanos(250)),
    )
    .unwrap();
    let table = emit_report(&r, OutputFormat::Table).unwrap();
    for m in Method::ALL {
        assert_eq!(
            table
                .lines()
                .filter(|l| l.starts_with(&format!("{} ", m.name())))
                .count(),
            1,
            "{m}"
        );
    }
    let csv = emit_report(&r, OutputFormat::Csv).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(reader.records().count(), 7);
    let json = emit_report(&r, OutputFormat::Json).unwrap();
    let back: BenchReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn empty_method_list_is_a_usage_error() {
    let c = cfg(&[], 1);
    assert!(matches!(
        run_benchmark(&bundled("case18.m"), &c, &MonotonicClock::new()),
        Err(Error::Usage(_))
    ));
}
