// SPDX-License-Identifier: MIT OR Apache-2.0

use clusterscan_wasm::{calibrate_value, detect_json, simulate_json};
use serde_json::Value;

#[test]
fn simulated_signal_has_expected_shape() {
    let v: Value = serde_json::from_str(&simulate_json(600, "gauss", 3).unwrap()).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 600);
    assert_eq!(v["breakpoints"], serde_json::json!([241, 361]));
    assert_eq!(simulate_json(600, "gauss", 3).unwrap(), simulate_json(600, "gauss", 3).unwrap());
    assert!(simulate_json(600, "cauchy", 3).is_err());
}

#[test]
fn calibration_matches_core() {
    let g = calibrate_value(600, 24, 0.05, 2000, 7).unwrap();
    let core = clusterscan::calibration::quantile_max_gcirc(600, 24, 0.05, 2000, 7).unwrap();
    assert_eq!(g, core);
    assert!(calibrate_value(600, 24, 0.05, 1_000_000, 7).is_err());
}

#[test]
fn detect_finds_noiseless_step() {
    let mut x = vec![0.0; 400];
    for v in &mut x[120..200] {
        *v = 1.0;
    }
    let v: Value = serde_json::from_str(&detect_json(&x, 20, 0.05, 500, 0).unwrap()).unwrap();
    assert_eq!(v["rejected"], true);
    assert_eq!(v["breakpoints"], serde_json::json!([121, 201]));
    assert_eq!(v["clusters"], serde_json::json!([[121, 201]]));
    assert_eq!(v["trace"].as_array().unwrap().len(), 381);
    assert!(detect_json(&[f64::NAN; 10], 2, 0.05, 500, 0).is_err());
}
