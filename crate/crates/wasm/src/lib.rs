//! Browser bindings: alpha/beta curves, the gap along a lambda sweep, and
//! shape variations of a planar body. Every function returns JSON text.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use gz_core::bodies::spec::parse_shorthand;
use gz_core::bodies::{boundary_curve_2d, DEFAULT_RHO_MIN};
use gz_core::inequalities::{EvalConfig, PairMeasures};
use gz_core::integrals::Method;
use gz_core::localform::{self, sample_psi};
use gz_core::measures::Potential;
use gz_core::Result;

/// `alpha` and `beta` on `steps + 1` points of `[0, r_max]` (beta from the first positive point).
pub fn alpha_beta_json(r_max: f64, steps: usize) -> Result<Value> {
    if !(r_max > 0.0) || !r_max.is_finite() || steps == 0 || steps > 10_000 {
        return Err(gz_core::GzError::Input("need r_max > 0 and 1 <= steps <= 10000".into()));
    }
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let r = r_max * i as f64 / steps as f64;
        let beta = if r > 0.0 { Some(localform::beta(r)?) } else { None };
        rows.push(json!({ "r": r, "alpha": localform::alpha(r)?, "beta": beta }));
    }
    Ok(json!({ "points": rows }))
}

/// Gaussian gap of two planar bodies at exponent `p` on `steps - 1` interior lambdas.
pub fn gap_curve_json(k: &str, l: &str, p: f64, steps: usize) -> Result<Value> {
    if !(2..=200).contains(&steps) {
        return Err(gz_core::GzError::Input("steps must lie in 2..=200".into()));
    }
    let g = Potential::gaussian(2)?;
    let k = parse_shorthand(k, 2)?;
    let l = parse_shorthand(l, 2)?;
    let lambdas: Vec<f64> = (1..steps).map(|i| i as f64 / steps as f64).collect();
    let cfg = EvalConfig { method: Method::Radial, ..EvalConfig::default() };
    let pair = PairMeasures::new(&g, &k, &l, &lambdas, &cfg)?;
    let points: Vec<Value> = pair
        .reports(p)
        .iter()
        .map(|r| json!({ "lambda": r.lambda, "gap": r.gap.value, "verdict": r.verdict }))
        .collect();
    Ok(json!({ "mu_k": pair.mu_k.value, "mu_l": pair.mu_l.value, "points": points }))
}

/// Variations of a planar body along `psi = 1 + amplitude cos(k theta)`.
pub fn variation_json(body: &str, amplitude: f64, k: f64) -> Result<Value> {
    let g = Potential::gaussian(2)?;
    let body = parse_shorthand(body, 2)?;
    let curve = boundary_curve_2d(&body, 720, DEFAULT_RHO_MIN)?;
    let psi = sample_psi(&curve, |t| 1.0 + amplitude * (k * t).cos());
    let first = localform::first_variation_2d(&g, &curve, &psi)?;
    let second = localform::second_variation_2d(&g, &curve, &psi)?;
    let local = match localform::local_c_estimate(&g, &curve, &psi) {
        Ok(r) => json!({ "c": r.c, "capped": r.capped, "mu": r.mu }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let boundary: Vec<[f64; 2]> = (0..curve.len()).step_by(4).map(|j| curve.points[j]).collect();
    Ok(json!({
        "first": { "formula": first.formula, "fd": first.fd, "relative_difference": first.relative_difference() },
        "second": { "formula": second.formula, "fd": second.fd, "relative_difference": second.relative_difference() },
        "local_c": local,
        "boundary": boundary,
    }))
}

fn js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn alpha_beta(r_max: f64, steps: usize) -> std::result::Result<String, JsError> {
    js(alpha_beta_json(r_max, steps))
}

#[wasm_bindgen]
pub fn gap_curve(k: &str, l: &str, p: f64, steps: usize) -> std::result::Result<String, JsError> {
    js(gap_curve_json(k, l, p, steps))
}

#[wasm_bindgen]
pub fn variation(body: &str, amplitude: f64, k: f64) -> std::result::Result<String, JsError> {
    js(variation_json(body, amplitude, k))
}
