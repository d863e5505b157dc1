// SPDX-License-Identifier: MIT OR Apache-2.0

//! Browser bindings for three operations: draw a noisy ramp-cluster signal,
//! calibrate the classification cutoff, and run the one-sided detector.
//!
//! The `*_json`/plain Rust functions carry the logic so they can be tested
//! natively; the `#[wasm_bindgen]` exports only translate errors.

use clusterscan::calibration::quantile_max_gcirc;
use clusterscan::rng::replication_rng;
use clusterscan::sim::{make_signal, sample_noise, NoiseFamily, SignalKind};
use clusterscan::{Detector, Series, WindowConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Kept small so a page stays responsive without worker threads.
const MAX_MC_REPS: usize = 20_000;

#[derive(Serialize)]
struct Signal {
    values: Vec<f64>,
    means: Vec<f64>,
    breakpoints: Vec<usize>,
}

/// Two-cluster ramp signal plus `noise` noise (`gauss`, `t6`, `laplace`, ...)
/// as JSON `{values, means, breakpoints}`.
pub fn simulate_json(p: usize, noise: &str, seed: u64) -> Result<String, String> {
    let truth = make_signal(&SignalKind::RampPair, p).map_err(|e| e.to_string())?;
    let family = NoiseFamily::parse(noise).map_err(|e| e.to_string())?;
    let mut rng = replication_rng(seed, 0);
    let z = sample_noise(&family, p, &mut rng).map_err(|e| e.to_string())?;
    let values = truth.means.iter().zip(z).map(|(m, z)| m + z).collect();
    let out = Signal {
        values,
        means: truth.means.clone(),
        breakpoints: truth.breakpoints.clone(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn check_reps(mc_reps: usize) -> Result<(), String> {
    if mc_reps > MAX_MC_REPS {
        return Err(format!("mc_reps {mc_reps} exceeds the demo limit {MAX_MC_REPS}"));
    }
    Ok(())
}

/// `(1−α)` quantile of the maximal unit-variance window mean.
pub fn calibrate_value(p: usize, k: usize, alpha: f64, mc_reps: usize, seed: u64) -> Result<f64, String> {
    check_reps(mc_reps)?;
    quantile_max_gcirc(p, k, alpha, mc_reps, seed).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Detection {
    rejected: bool,
    k: usize,
    gamma: f64,
    delta: f64,
    sigma2_hat: Option<f64>,
    breakpoints: Vec<usize>,
    clusters: Vec<[usize; 2]>,
    trace_offset: usize,
    trace: Vec<f64>,
}

/// One-sided detection; `k = 0` picks `⌊√p⌋`. Returns JSON with the
/// break-points, half-open clusters and the classification statistic.
pub fn detect_json(values: &[f64], k: usize, alpha: f64, mc_reps: usize, seed: u64) -> Result<String, String> {
    check_reps(mc_reps)?;
    let series = Series::new(values.to_vec()).map_err(|e| e.to_string())?;
    let config = if k == 0 { WindowConfig::sqrt_rule(values.len()) } else { WindowConfig::new(k) }
        .with_alpha(alpha)
        .with_mc_reps(mc_reps)
        .with_seed(seed);
    let result = Detector::new(config).one_sided(&series).map_err(|e| e.to_string())?;
    let (trace_offset, trace) = result
        .statistics
        .first()
        .map_or((0, Vec::new()), |s| (s.offset, s.values.clone()));
    let out = Detection {
        rejected: result.rejected_null,
        k: result.k,
        gamma: result.thresholds.gamma,
        delta: result.thresholds.delta,
        sigma2_hat: result.noise.sigma2_hat,
        breakpoints: result.breakpoint_indices(),
        clusters: result.clusters.iter().map(|c| [c.start, c.end]).collect(),
        trace_offset,
        trace,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

// Seeds are `u32` on the JS side so plain numbers can be passed.

#[wasm_bindgen]
pub fn simulate(p: usize, noise: &str, seed: u32) -> Result<String, JsValue> {
    simulate_json(p, noise, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn calibrate(p: usize, k: usize, alpha: f64, mc_reps: usize, seed: u32) -> Result<f64, JsValue> {
    calibrate_value(p, k, alpha, mc_reps, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn detect(values: &[f64], k: usize, alpha: f64, mc_reps: usize, seed: u32) -> Result<String, JsValue> {
    detect_json(values, k, alpha, mc_reps, seed.into()).map_err(|e| JsValue::from_str(&e))
}
