use crate::continuation::max_change;
use crate::error::Result;
use crate::netmodel::{ShuntHandling, ZipScale};
use crate::solvers::{
    Clock, DlfOperator, Prepared, Scratch, SolveReport, Status, StepTimings, SweepSchedule,
};
use crate::sparse::SparseLu;
use crate::C64;

/// Iterates `v ← step(v)` from a flat start until the update is below `eps`
/// and the power residual is below the mismatch tolerance.
fn iterate<C: Clock>(
    p: &Prepared,
    clock: &C,
    mut step: impl FnMut(&[C64], &mut [C64]) -> Result<()>,
) -> SolveReport {
    let start = clock.now();
    let cfg = &p.config;
    let m = &p.model;
    let n = m.n_pq();
    let mut v = vec![m.v0; n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    let mut full = Vec::with_capacity(n + 1);
    let mut timings = StepTimings {
        per_iteration: Vec::with_capacity(cfg.max_iter),
        ..StepTimings::default()
    };
    let mut status = Status::IterationLimit;
    let mut detail = None;
    let mut count = 0;
    while count < cfg.max_iter {
        count += 1;
        let t0 = clock.now();
        let outcome = step(&v, &mut next);
        let change = max_change(&next, &v);
        std::mem::swap(&mut v, &mut next);
        let blown = v
            .iter()
            .any(|x| !x.is_finite() || x.norm() > cfg.divergence_guard);
        let done = match outcome {
            Err(e) => {
                status = Status::Diverged;
                detail = Some(e.to_string());
                true
            }
            Ok(()) if blown || !change.is_finite() => {
                status = Status::Diverged;
                detail = Some(format!("iterate exceeded {} p.u.", cfg.divergence_guard));
                true
            }
            Ok(()) if change < cfg.eps && m.mismatch(&v, &mut full) < cfg.mismatch_tol => {
                status = Status::Converged;
                true
            }
            Ok(()) => false,
        };
        timings.per_iteration.push(clock.now() - t0);
        if done {
            break;
        }
    }
    timings.total = clock.now() - start;
    if status == Status::IterationLimit {
        detail = Some(format!("no convergence within {} iterations", cfg.max_iter));
    }
    m.report(p.method, status, &v, count, timings, detail)
}

pub(super) fn run_bfs<C: Clock>(p: &Prepared, sweep: &SweepSchedule, clock: &C) -> Result<SolveReport> {
    let m = &p.model;
    let mut inj = vec![C64::new(0.0, 0.0); m.n_pq()];
    let mut scratch = Scratch::new(m.n_pq());
    Ok(iterate(p, clock, |v, out| {
        m.loads
            .injection_into(v, ZipScale::UNIT, ShuntHandling::Current, &mut inj)?;
        sweep.apply(&inj, m.v0, out, &mut scratch);
        Ok(())
    }))
}

pub(super) fn run_direct<C: Clock>(
    p: &Prepared,
    op: &DlfOperator,
    handling: ShuntHandling,
    clock: &C,
) -> Result<SolveReport> {
    let m = &p.model;
    let mut inj = vec![C64::new(0.0, 0.0); m.n_pq()];
    let mut scratch = Scratch::new(m.n_pq());
    let shunt_offset: Vec<C64> = match handling {
        ShuntHandling::Matrix => m.embedding.y_shunt.iter().map(|y| y * m.v0).collect(),
        ShuntHandling::Current => Vec::new(),
    };
    Ok(iterate(p, clock, |v, out| {
        m.loads.injection_into(v, ZipScale::UNIT, handling, &mut inj)?;
        for (i, o) in inj.iter_mut().zip(&shunt_offset) {
            *i -= o;
        }
        op.apply(&inj, out, &mut scratch);
        for x in out.iter_mut() {
            *x += m.v0;
        }
        Ok(())
    }))
}

pub(super) fn run_zbus<C: Clock>(
    p: &Prepared,
    lu: &SparseLu<C64>,
    slack_column: &[C64],
    handling: ShuntHandling,
    clock: &C,
) -> Result<SolveReport> {
    let m = &p.model;
    let mut rhs = vec![C64::new(0.0, 0.0); m.n_pq()];
    let mut work = vec![C64::new(0.0, 0.0); m.n_pq()];
    Ok(iterate(p, clock, |v, out| {
        m.loads.injection_into(v, ZipScale::UNIT, handling, &mut rhs)?;
        for (r, y) in rhs.iter_mut().zip(slack_column) {
            *r -= y * m.v0;
        }
        lu.solve_into(&rhs, out, &mut work);
        Ok(())
    }))
}
