use radial_helm_wasm::api::{case_names, pv_curve, series_trace, solve_profile};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn every_bundled_case_solves() {
    let names = parse(&case_names());
    for name in names.as_array().unwrap() {
        let name = name.as_str().unwrap();
        let v = parse(&solve_profile(name, "s-helm", 1.0).unwrap());
        assert_eq!(v["converged"], true, "{name}");
        assert_eq!(
            v["magnitudes"].as_array().unwrap().len(),
            v["node_ids"].as_array().unwrap().len()
        );
    }
}

#[test]
fn accelerated_trace_reaches_the_solution() {
    let v = parse(&series_trace("case33bw", -1, 12, 1.0).unwrap());
    let last = |key: &str| v[key].as_array().unwrap().last().unwrap().as_f64().unwrap();
    let solution = v["solution"].as_f64().unwrap();
    assert!((last("accelerated") - solution).abs() < 1e-6);
    assert_eq!(v["node"], 18);
}

#[test]
fn trace_rejects_the_slack() {
    let e = series_trace("case33bw", 1, 5, 1.0).unwrap_err();
    assert!(e.contains("not a load node"), "{e}");
    assert!(solve_profile("case9", "nr", 1.0)
        .unwrap_err()
        .contains("unknown case"));
}

#[test]
fn pv_curve_is_decreasing_and_stops_past_the_nose() {
    let v = parse(&pv_curve("case33bw", "helm-lu", 10.0, 20).unwrap());
    let status = v["stopped"]["status"].as_str().unwrap();
    assert_ne!(status, "converged");
    let vmin: Vec<f64> = v["vmin"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(vmin.len() >= 2);
    assert!(vmin.windows(2).all(|w| w[1] < w[0]));
}
