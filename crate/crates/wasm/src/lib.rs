//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string; the page in `www/` renders them.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cliquelab::analytic::{self, EdgeProbability};
use cliquelab::harness::{run_trial, summarize, ProbabilitySpec, SweepConfig, SweepPoint, TrialRecord};

/// Largest vertex count the page accepts; keeps one call under a second.
pub const MAX_N: u64 = 400;
pub const MAX_TRIALS: usize = 200;
pub const MAX_STEPS: usize = 40;

fn check_n(n: u64) -> Result<(), String> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must be between 1 and {MAX_N}"))
    }
}

fn config(n: u64, k: usize, trials: usize, seed: u64) -> SweepConfig {
    let mut cfg = SweepConfig::single(n, EdgeProbability::Explicit(0.0), k, trials, seed);
    cfg.max_faces_per_dim = 200_000;
    cfg
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// One trial of X(n, n^alpha) with Betti numbers through `k`.
pub fn sample_json(n: u64, alpha: f64, k: usize, seed: u64) -> Result<String, String> {
    check_n(n)?;
    if !(1..=4).contains(&k) {
        return Err("k must be between 1 and 4".into());
    }
    let spec = EdgeProbability::Alpha(alpha);
    let p = spec.resolve(n).map_err(|e| e.to_string())?;
    let cfg = config(n, k, 1, seed);
    let point = SweepPoint { n, p, alpha: Some(alpha) };
    let record: TrialRecord = run_trial(&cfg, point, 0).map_err(|e| e.to_string())?;
    to_json(&record)
}

#[derive(Serialize)]
struct CurvePoint {
    alpha: f64,
    p: f64,
    nonzero_prob: Option<f64>,
    ratio_mean: Option<f64>,
    f_mean: f64,
    f_expected: f64,
    truncated: usize,
}

/// Empirical `Pr[β̃_k != 0]` and mean `β̃_k / f_k` on an alpha grid.
pub fn phase_curve_json(
    n: u64,
    k: usize,
    alpha_lo: f64,
    alpha_hi: f64,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    check_n(n)?;
    if !(1..=3).contains(&k) {
        return Err("k must be between 1 and 3".into());
    }
    if !(2..=MAX_STEPS).contains(&steps) || !(1..=MAX_TRIALS).contains(&trials) {
        return Err(format!("steps in 2..={MAX_STEPS}, trials in 1..={MAX_TRIALS}"));
    }
    if !(alpha_lo < alpha_hi && alpha_hi <= 0.0) {
        return Err("need alpha_lo < alpha_hi <= 0".into());
    }
    let alphas: Vec<f64> = (0..steps)
        .map(|i| alpha_lo + (alpha_hi - alpha_lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let mut cfg = config(n, k, trials, seed);
    cfg.p_spec = ProbabilitySpec::Alpha(alphas.clone());
    cfg.detector_budget = 0;
    let points = cfg.points().map_err(|e| e.to_string())?;
    let mut curve = Vec::with_capacity(points.len());
    for (point, &alpha) in points.into_iter().zip(&alphas) {
        let records = (0..trials as u64)
            .map(|i| run_trial(&cfg, point, i))
            .collect::<cliquelab::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let row = summarize(&records, k).pop().expect("one row per k");
        curve.push(CurvePoint {
            alpha,
            p: point.p,
            nonzero_prob: row.nonzero_prob,
            ratio_mean: row.ratio_mean,
            f_mean: row.f_mean,
            f_expected: row.f_expected,
            truncated: records.iter().filter(|r| r.truncated).count(),
        });
    }
    to_json(&curve)
}

/// Closed-form values at `p = n^alpha` and the threshold probe for `k`.
pub fn analytic_json(n: u64, alpha: f64, k: u64, offset: f64) -> Result<String, String> {
    let p = EdgeProbability::Alpha(alpha).resolve(n).map_err(|e| e.to_string())?;
    let s = |r: cliquelab::Result<f64>| r.map_err(|e| e.to_string());
    let probe = analytic::threshold_probe(n, k.max(1), offset, Some(2 * k + 2)).map_err(|e| e.to_string())?;
    let dim = analytic::dimension_estimate(n as f64, p).ok();
    to_json(&serde_json::json!({
        "n": n,
        "alpha": alpha,
        "p": p,
        "k": k,
        "expected_faces": s(analytic::expected_faces(n, p, k))?,
        "expected_bad_pairs": s(analytic::expected_bad_pairs(n, p, k))?,
        "face_variance": s(analytic::face_variance(n, p, k))?,
        "dimension_estimate": dim,
        "threshold_probe": probe,
    }))
}

#[wasm_bindgen]
pub fn sample(n: u32, alpha: f64, k: u32, seed: u32) -> Result<String, JsError> {
    sample_json(n as u64, alpha, k as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = phaseCurve)]
pub fn phase_curve(
    n: u32,
    k: u32,
    alpha_lo: f64,
    alpha_hi: f64,
    steps: u32,
    trials: u32,
    seed: u32,
) -> Result<String, JsError> {
    phase_curve_json(n as u64, k as usize, alpha_lo, alpha_hi, steps as usize, trials as usize, seed as u64)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analytic(n: u32, alpha: f64, k: u32, offset: f64) -> Result<String, JsError> {
    analytic_json(n as u64, alpha, k as u64, offset).map_err(|e| JsError::new(&e))
}
