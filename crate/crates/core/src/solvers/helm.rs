use std::collections::VecDeque;

use crate::continuation::{detect_nonexistence, max_change, AccelState, Trend};
use crate::error::Result;
use crate::series::SeriesState;
use crate::solvers::{Clock, OrderTiming, Prepared, SolveReport, Status, Step4Backend, StepTimings};

pub(super) fn run<C: Clock>(p: &Prepared, backend: &Step4Backend, clock: &C) -> Result<SolveReport> {
    let start = clock.now();
    let cfg = &p.config;
    let m = &p.model;
    let n = m.n_pq();
    let mut state = SeriesState::germ(n, m.v0)?;
    let mut accel = AccelState::new(n, cfg.max_order);
    accel.accel_update(&state.v[0]);
    let mut history: VecDeque<Vec<_>> = VecDeque::with_capacity(cfg.window + 1);
    history.push_back(accel.estimates().to_vec());
    let mut scratch = backend.scratch();
    let mut full = Vec::with_capacity(n + 1);
    let mut timings = StepTimings {
        per_order: Vec::with_capacity(cfg.max_order),
        ..StepTimings::default()
    };
    let mut status = None;
    let mut order = 0;
    while order < cfg.max_order {
        order += 1;
        let t0 = clock.now();
        state.reciprocal_step()?;
        state.assemble_rhs(&m.embedding);
        let t1 = clock.now();
        state.solve_step(backend, &mut scratch);
        let t2 = clock.now();
        accel.accel_update(&state.v[order]);
        let est = accel.estimates();
        let change = max_change(est, accel.previous_estimates());
        if history.len() == cfg.window.max(1) {
            history.pop_front();
        }
        history.push_back(est.to_vec());
        if change < cfg.eps && m.mismatch(est, &mut full) < cfg.mismatch_tol {
            status = Some(Status::Converged);
        }
        let t3 = clock.now();
        timings.per_order.push(OrderTiming {
            steps23: t1 - t0,
            step4: t2 - t1,
            step5: t3 - t2,
        });
        if status.is_some() {
            break;
        }
    }
    let status = status.unwrap_or_else(|| {
        let h: Vec<_> = history.iter().cloned().collect();
        match detect_nonexistence(&h, cfg.window, cfg.eps) {
            Trend::Oscillating => Status::NoSolutionDetected,
            _ => Status::Inconclusive,
        }
    });
    timings.total = clock.now() - start;
    for o in &timings.per_order {
        timings.steps23 += o.steps23;
        timings.step4 += o.step4;
        timings.step5 += o.step5;
    }
    let detail = (status != Status::Converged)
        .then(|| format!("no convergence within {} series terms", cfg.max_order));
    Ok(m.report(p.method, status, accel.estimates(), order, timings, detail))
}
