//! wasm-bindgen exports for the static page in `www/`.
//!
//! Every export returns a JSON string. The plain functions underneath are
//! ordinary Rust so they can be tested natively.

use dixon_core::driver::{uniform_grid, RunOptions, Solver};
use dixon_core::problem::{admissibility_bound, exterior_sigma_limit, ProblemSpec};
use dixon_core::specfun::laurent_coeffs;
use dixon_core::Method;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request.
pub const MAX_POINTS: usize = 201;

fn parse_methods(list: &str) -> Result<Vec<Method>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(|e| e.to_string()))
        .collect()
}

/// `f` on `n` uniform points of `[0, x_max]`, per method.
pub fn solve_curve(
    a: f64,
    big_a: f64,
    lambda: f64,
    n: usize,
    x_max: f64,
    methods: &str,
) -> Result<Value, String> {
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("points must be in 2..={MAX_POINTS}"));
    }
    let spec = ProblemSpec::real(a, big_a, lambda).map_err(|e| e.to_string())?;
    let methods = parse_methods(methods)?;
    if methods.is_empty() {
        return Err("no methods selected".into());
    }
    let opts = RunOptions::default().with_methods(&methods);
    let solver = Solver::new(&spec, &opts).map_err(|e| e.to_string())?;
    let xs = uniform_grid(n, 0.0, x_max).map_err(|e| e.to_string())?;
    let run = solver.run(&xs).map_err(|e| e.to_string())?;
    let curves: Vec<Value> = run
        .results
        .iter()
        .map(|r| {
            let points: Vec<Value> =
                r.xs.iter()
                    .zip(&r.values)
                    .map(|(x, v)| json!([x, v.re]))
                    .collect();
            json!({"method": r.method.name(), "points": points})
        })
        .collect();
    let max_disc = (0..xs.len())
        .map(|i| run.discrepancy(i))
        .fold(0.0, f64::max);
    Ok(json!({
        "bound": solver.bound(),
        "sigma_interior": solver.sigma_interior(),
        "sigma_exterior": solver.sigma_exterior(),
        "f_a": solver.fa().map(|(v, _)| v.re),
        "max_discrepancy": max_disc,
        "curves": curves,
    }))
}

/// Bound `B(a, a+1)/B(a+σ, a+1-σ)` sampled across `(-a, a+1)`, with the
/// admissible set for `|λ|` marked.
pub fn admissibility_profile(a: f64, lambda: f64, samples: usize) -> Result<Value, String> {
    if !(3..=2001).contains(&samples) {
        return Err("samples must be in 3..=2001".into());
    }
    let spec = ProblemSpec::real(a, 1.0, lambda).map_err(|e| e.to_string())?;
    let (lo, hi) = (-a, a + 1.0);
    let step = (hi - lo) / (samples + 1) as f64;
    let mut points = Vec::with_capacity(samples);
    for i in 1..=samples {
        let sigma = lo + step * i as f64;
        let bound = admissibility_bound(a, sigma).map_err(|e| e.to_string())?;
        points.push(json!([sigma, bound, lambda.abs() < bound]));
    }
    let ext = exterior_sigma_limit(&spec).map_err(|e| e.to_string())?;
    Ok(json!({
        "a": a,
        "lambda_abs": lambda.abs(),
        "bound_at_half": admissibility_bound(a, 0.5).map_err(|e| e.to_string())?,
        "exterior_sigma_limit": ext,
        "points": points,
    }))
}

/// `c[k][m]` for `k <= k_max`, `m <= m_max`.
pub fn laurent(m_max: usize, k_max: usize) -> Result<Value, String> {
    if m_max > 40 || k_max > 12 {
        return Err("table limited to m <= 40, k <= 12".into());
    }
    let t = laurent_coeffs(m_max, k_max);
    let rows: Result<Vec<Vec<f64>>, String> = (0..=k_max)
        .map(|k| {
            (0..=m_max)
                .map(|m| t.get(k, m).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();
    Ok(json!({"m_max": m_max, "k_max": k_max, "c": rows?}))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = solveCurve)]
pub fn solve_curve_js(
    a: f64,
    big_a: f64,
    lambda: f64,
    n: usize,
    x_max: f64,
    methods: &str,
) -> Result<String, JsValue> {
    to_js(solve_curve(a, big_a, lambda, n, x_max, methods))
}

#[wasm_bindgen(js_name = admissibilityProfile)]
pub fn admissibility_profile_js(a: f64, lambda: f64, samples: usize) -> Result<String, JsValue> {
    to_js(admissibility_profile(a, lambda, samples))
}

#[wasm_bindgen(js_name = laurentTable)]
pub fn laurent_js(m_max: usize, k_max: usize) -> Result<String, JsValue> {
    to_js(laurent(m_max, k_max))
}
