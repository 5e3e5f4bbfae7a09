use crate::error::Result;
use crate::solvers::{Clock, Model, Prepared, SolveReport, Status, StepTimings};
use crate::sparse::{minimum_degree_order, CscMatrix, SparseLu};
use crate::C64;

const GROWTH_LIMIT: usize = 3;

/// Column order for the Jacobian pattern, computed once.
pub(super) fn jacobian_order(m: &Model) -> Vec<usize> {
    let n = m.n_pq();
    let mut trip = Vec::new();
    for k in 1..=n {
        for (i, _) in m.admittance.y_full.column(k) {
            if i >= 1 {
                let (r, c) = (i - 1, k - 1);
                trip.extend([(r, c, 1.0), (r, n + c, 1.0), (n + r, c, 1.0), (n + r, n + c, 1.0)]);
            }
        }
        let d = k - 1;
        trip.extend([(d, d, 1.0), (d, n + d, 1.0), (n + d, d, 1.0), (n + d, n + d, 1.0)]);
    }
    minimum_degree_order(&CscMatrix::from_triplets(2 * n, 2 * n, &trip))
}

/// Polar Newton–Raphson on the PQ power mismatches, flat start, full step.
pub(super) fn run<C: Clock>(p: &Prepared, order: &[usize], clock: &C) -> Result<SolveReport> {
    let start = clock.now();
    let cfg = &p.config;
    let m = &p.model;
    let y = &m.admittance.y_full;
    let loads = &m.loads;
    let n = m.n_pq();
    let mut theta = vec![m.v0.arg(); n];
    let mut vm = vec![m.v0.norm(); n];
    let mut v = vec![m.v0; n + 1];
    let mut f = vec![C64::new(0.0, 0.0); n];
    let mut rhs = vec![0.0; 2 * n];
    let mut dx = vec![0.0; 2 * n];
    let mut work = vec![0.0; 2 * n];
    let mut trip = Vec::new();
    let mut timings = StepTimings {
        per_iteration: Vec::with_capacity(cfg.max_iter),
        ..StepTimings::default()
    };
    let mut status = Status::IterationLimit;
    let mut detail = None;
    let mut previous = f64::INFINITY;
    let mut growth = 0;
    let mut count = 0;
    while count < cfg.max_iter {
        count += 1;
        let t0 = clock.now();
        for i in 0..n {
            v[i + 1] = C64::from_polar(vm[i], theta[i]);
        }
        let ibus = y.mul_vec(&v);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let vi = v[i + 1];
            f[i] = vi * ibus[i + 1].conj() - loads.scheduled_injection(i, vi);
            worst = if f[i].norm().is_nan() {
                f64::NAN
            } else {
                worst.max(f[i].norm())
            };
        }
        let stop = if !worst.is_finite() || vm.iter().any(|x| x.abs() > cfg.divergence_guard) {
            status = Status::Diverged;
            detail = Some("mismatch is not finite".into());
            true
        } else if worst < cfg.mismatch_tol {
            status = Status::Converged;
            true
        } else {
            growth = if worst > previous { growth + 1 } else { 0 };
            previous = worst;
            if growth >= GROWTH_LIMIT {
                status = Status::Diverged;
                detail = Some(format!("mismatch grew for {GROWTH_LIMIT} consecutive iterations"));
                true
            } else {
                false
            }
        };
        if stop {
            timings.per_iteration.push(clock.now() - t0);
            break;
        }

        trip.clear();
        for k in 1..=n {
            let vk = v[k];
            let uk = vk / vk.norm();
            for (i, yik) in y.column(k) {
                if i == 0 {
                    continue;
                }
                let vi = v[i];
                let d_theta = -C64::i() * vi * (yik * vk).conj();
                let d_vm = vi * (yik * uk).conj();
                push_block(&mut trip, n, i - 1, k - 1, d_theta, d_vm);
            }
            let i = k - 1;
            let il = loads.i_load[i].conj();
            let d_theta = C64::i() * vk * (ibus[k].conj() + il);
            let d_vm = uk * (ibus[k].conj() + il);
            push_block(&mut trip, n, i, i, d_theta, d_vm);
        }
        let jac = CscMatrix::from_triplets(2 * n, 2 * n, &trip);
        let lu = match SparseLu::factor_with_order(&jac, order) {
            Ok(lu) => lu,
            Err(e) => {
                status = Status::Diverged;
                detail = Some(format!("jacobian: {e}"));
                timings.per_iteration.push(clock.now() - t0);
                break;
            }
        };
        for i in 0..n {
            rhs[i] = -f[i].re;
            rhs[n + i] = -f[i].im;
        }
        lu.solve_into(&rhs, &mut dx, &mut work);
        for i in 0..n {
            theta[i] += dx[i];
            vm[i] += dx[n + i];
        }
        timings.per_iteration.push(clock.now() - t0);
    }
    timings.total = clock.now() - start;
    if status == Status::IterationLimit {
        detail = Some(format!("no convergence within {} iterations", cfg.max_iter));
    }
    Ok(m.report(p.method, status, &v[1..], count, timings, detail))
}

fn push_block(trip: &mut Vec<(usize, usize, f64)>, n: usize, r: usize, c: usize, d_theta: C64, d_vm: C64) {
    trip.push((r, c, d_theta.re));
    trip.push((n + r, c, d_theta.im));
    trip.push((r, n + c, d_vm.re));
    trip.push((n + r, n + c, d_vm.im));
}
