//! Browser bindings. Every function returns a JSON string; errors become
//! JavaScript exceptions carrying the message.

use wasm_bindgen::prelude::*;

/// The demo operations as plain Rust, errors as messages.
pub mod api {
    use radial_helm::continuation::EpsilonTable;
    use radial_helm::ingest::{apply_scenario, parse_case, CaseFormat, Scenario};
    use radial_helm::netmodel::NetworkCase;
    use radial_helm::solvers::{
        prepare, series_coefficients, Method, NoClock, SolveReport, SolverConfig, Status,
    };
    use serde_json::json;

    const CASES: [(&str, CaseFormat, &str); 5] = [
        (
            "case18",
            CaseFormat::Matpower,
            include_str!("../../../cases/case18.m"),
        ),
        (
            "case33bw",
            CaseFormat::Matpower,
            include_str!("../../../cases/case33bw.m"),
        ),
        (
            "case69",
            CaseFormat::Matpower,
            include_str!("../../../cases/case69.m"),
        ),
        (
            "case141",
            CaseFormat::Matpower,
            include_str!("../../../cases/case141.m"),
        ),
        (
            "case123z",
            CaseFormat::Native,
            include_str!("../../../cases/case123z.toml"),
        ),
    ];

    fn fail(e: impl std::fmt::Display) -> String {
        e.to_string()
    }

    fn case(name: &str) -> Result<NetworkCase, String> {
        let (_, format, text) = CASES
            .iter()
            .find(|(n, ..)| *n == name)
            .ok_or_else(|| fail(format!("unknown case `{name}`")))?;
        parse_case(text, *format).map_err(fail)
    }

    fn scaled(name: &str, load_scale: f64) -> Result<NetworkCase, String> {
        let base = case(name)?;
        if load_scale == 1.0 {
            return Ok(base);
        }
        let s = Scenario::uniform("scaled", load_scale, load_scale, load_scale);
        apply_scenario(&base, &s).map_err(fail)
    }

    fn run(case: &NetworkCase, method: Method) -> Result<SolveReport, String> {
        prepare(case, method, &SolverConfig::default())
            .and_then(|p| p.run(&NoClock))
            .map_err(fail)
    }

    pub fn case_names() -> String {
        json!(CASES.iter().map(|(n, ..)| *n).collect::<Vec<_>>()).to_string()
    }

    pub fn method_names() -> String {
        json!(Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>()).to_string()
    }

    /// Voltage magnitude profile of `case` with every load multiplied by `load_scale`.
    pub fn solve_profile(case_name: &str, method: &str, load_scale: f64) -> Result<String, String> {
        let method: Method = method.parse().map_err(fail)?;
        let r = run(&scaled(case_name, load_scale)?, method)?;
        Ok(json!({
            "method": method.name(),
            "status": r.status.to_string(),
            "converged": r.converged(),
            "steps": r.orders_or_iterations,
            "max_mismatch": r.max_mismatch,
            "node_ids": r.node_ids,
            "magnitudes": r.magnitudes(),
        })
        .to_string())
    }

    /// Partial sums and accelerated estimates of one node's voltage series,
    /// order by order. `node` is a bus id; pass a negative value to pick the
    /// node with the lowest converged voltage.
    pub fn series_trace(
        case_name: &str,
        node: i32,
        orders: usize,
        load_scale: f64,
    ) -> Result<String, String> {
        let case = scaled(case_name, load_scale)?;
        let report = run(&case, Method::SHelm)?;
        let pos = if node < 0 {
            let mags = report.magnitudes();
            (1..mags.len())
                .min_by(|&a, &b| mags[a].total_cmp(&mags[b]))
                .ok_or_else(|| fail("case has no load nodes"))?
        } else {
            report
                .node_ids
                .iter()
                .position(|&id| id as i64 == node as i64)
                .filter(|&k| k > 0)
                .ok_or_else(|| fail(format!("bus {node} is not a load node of {case_name}")))?
        };
        let prepared = prepare(&case, Method::SHelm, &SolverConfig::default()).map_err(fail)?;
        let coeffs = series_coefficients(&prepared, orders.max(1)).map_err(fail)?;
        let mut table = EpsilonTable::with_capacity(coeffs.len());
        let mut partial = Vec::new();
        let mut accelerated = Vec::new();
        for c in &coeffs {
            table.push(c[pos - 1]);
            partial.push(table.partial_sum().norm());
            accelerated.push(table.estimate().norm());
        }
        Ok(json!({
            "node": report.node_ids[pos],
            "status": report.status.to_string(),
            "solution": report.voltages[pos].norm(),
            "coefficients": coeffs.iter().map(|c| c[pos - 1].norm()).collect::<Vec<_>>(),
            "partial_sums": partial,
            "accelerated": accelerated,
        })
        .to_string())
    }

    /// Lowest node voltage as the load grows from zero to `max_scale`, sampled
    /// at `points` loadings. Stops at the first loading without a solution.
    pub fn pv_curve(case_name: &str, method: &str, max_scale: f64, points: usize) -> Result<String, String> {
        let method: Method = method.parse().map_err(fail)?;
        let base = case(case_name)?;
        let points = points.max(2);
        let mut scale = Vec::new();
        let mut vmin = Vec::new();
        let mut stop = None;
        for k in 1..=points {
            let s = max_scale * k as f64 / points as f64;
            let c = apply_scenario(&base, &Scenario::uniform("scaled", s, s, s)).map_err(fail)?;
            let r = run(&c, method)?;
            if r.status != Status::Converged {
                stop = Some(json!({ "scale": s, "status": r.status.to_string() }));
                break;
            }
            scale.push(s);
            vmin.push(r.magnitudes()[1..].iter().copied().fold(f64::INFINITY, f64::min));
        }
        Ok(json!({ "method": method.name(), "scale": scale, "vmin": vmin, "stopped": stop }).to_string())
    }
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn case_names() -> String {
    api::case_names()
}

#[wasm_bindgen]
pub fn method_names() -> String {
    api::method_names()
}

#[wasm_bindgen]
pub fn solve_profile(case_name: &str, method: &str, load_scale: f64) -> Result<String, JsValue> {
    js(api::solve_profile(case_name, method, load_scale))
}

#[wasm_bindgen]
pub fn series_trace(case_name: &str, node: i32, orders: usize, load_scale: f64) -> Result<String, JsValue> {
    js(api::series_trace(case_name, node, orders, load_scale))
}

#[wasm_bindgen]
pub fn pv_curve(case_name: &str, method: &str, max_scale: f64, points: usize) -> Result<String, JsValue> {
    js(api::pv_curve(case_name, method, max_scale, points))
}
