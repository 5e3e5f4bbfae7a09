#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use radial_helm::dense::DenseMatrix;
use radial_helm::ingest::{apply_scenario, read_case, read_scenario};
use radial_helm::netmodel::{Branch, Bus, NetworkCase, Slack};
use radial_helm::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

pub fn bundled(file: &str) -> NetworkCase {
    read_case(&cases_dir().join(file), None).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn with_scenario(file: &str, scenario: &str) -> NetworkCase {
    let base = bundled(file);
    let s = read_scenario(&cases_dir().join("scenarios").join(format!("{scenario}.toml")))
        .unwrap_or_else(|e| panic!("{scenario}: {e}"));
    apply_scenario(&base, &s).unwrap()
}

pub const RADIAL_MATPOWER: [&str; 4] = ["case18.m", "case33bw.m", "case69.m", "case141.m"];

pub const MESHED: [(&str, &str); 3] = [
    ("case18.m", "case18-meshed"),
    ("case33bw.m", "case33bw-meshed"),
    ("case69.m", "case69-meshed"),
];

pub const ZIP_SCENARIOS: [&str; 8] = [
    "p-medium", "p-high", "i-medium", "i-high", "z-medium", "z-high", "medium", "high",
];

/// Slack `0`, one PQ bus `1` drawing `s` through impedance `z`.
pub fn two_bus(z: C64, s: C64, v0: C64) -> NetworkCase {
    let mut load = Bus::unloaded(1);
    load.load_p = s;
    NetworkCase {
        name: "two-bus".into(),
        base_mva: 1.0,
        base_kv: 1.0,
        slack: Slack { id: 0, v0 },
        buses: vec![Bus::unloaded(0), load],
        branches: vec![Branch::new(0, 1, z)],
    }
}

/// Closed-form high-voltage solution of `V = V0 − z·conj(S / V)`.
///
/// With `m = |V|²` and `c = −z·conj(S)` the equation reduces to
/// `m² − (2 Re c + |V0|²) m + |c|² = 0`; the larger root gives
/// `V = conj((m − c) / V0)`. `None` when the discriminant is negative.
pub fn two_bus_voltage(z: C64, s: C64, v0: C64) -> Option<C64> {
    let cc = -z * s.conj();
    let b = 2.0 * cc.re + v0.norm_sqr();
    let disc = b * b - 4.0 * cc.norm_sqr();
    if disc < 0.0 {
        return None;
    }
    let m = 0.5 * (b + disc.sqrt());
    Some(((m - cc) / v0).conj())
}

/// Fixed-point refinement of the same equation, used to cross-check the
/// closed form away from the nose.
pub fn two_bus_fixed_point(z: C64, s: C64, v0: C64) -> C64 {
    let mut v = v0;
    for _ in 0..10_000 {
        let next = v0 - z * (s / v).conj();
        if (next - v).norm() < 1e-15 {
            return next;
        }
        v = next;
    }
    v
}

/// Largest load multiplier with a real solution, by bisection on the sign of
/// the discriminant.
pub fn two_bus_nose(z: C64, s: C64, v0: C64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while two_bus_voltage(z, s * hi, v0).is_some() {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if two_bus_voltage(z, s * mid, v0).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn to_na(m: &DenseMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.row(i)[j])
}

pub fn rows_to_na(rows: &[Vec<C64>]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Relative difference of two coefficient vectors, scaled by the larger one.
pub fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    max_diff(a, b) / scale
}

/// Independent nodal admittance matrix (slack first, then buses in case
/// order) assembled entry by entry from the π-model.
pub fn ybus_oracle(case: &NetworkCase) -> DMatrix<C64> {
    let mut ids = vec![case.slack.id];
    ids.extend(case.buses.iter().map(|b| b.id).filter(|&id| id != case.slack.id));
    let pos = |id: usize| ids.iter().position(|&x| x == id).unwrap();
    let n = ids.len();
    let mut y = DMatrix::from_element(n, n, c(0.0, 0.0));
    for br in case.branches.iter().filter(|b| b.in_service) {
        let (f, t) = (pos(br.from), pos(br.to));
        let ys = br.series_impedance.inv();
        let half = br.total_charging * 0.5;
        y[(f, f)] += ys + half;
        y[(t, t)] += ys + half;
        y[(f, t)] -= ys;
        y[(t, f)] -= ys;
    }
    for b in &case.buses {
        let k = pos(b.id);
        y[(k, k)] += b.shunt + b.load_z;
    }
    y
}
