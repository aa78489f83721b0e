//! wasm-bindgen bindings for the browser demo in `www/`.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(r: demo::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Seeds arrive as JS numbers; integers up to 2^53 are exact.
fn seed(s: f64) -> u64 {
    s.max(0.0) as u64
}

#[wasm_bindgen(js_name = fbmPath)]
pub fn fbm_path(hurst: f64, steps: usize, seed_value: f64) -> Result<Vec<f64>, JsError> {
    js(demo::fbm_path(hurst, steps, seed(seed_value)))
}

#[wasm_bindgen(js_name = presetDimension)]
pub fn preset_dimension(name: &str) -> Result<usize, JsError> {
    demo::preset_dimension(name).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = eulerPath)]
pub fn euler_path(name: &str, hurst: f64, steps: usize, driver_steps: usize, seed_value: f64) -> Result<Vec<f64>, JsError> {
    js(demo::euler_path(name, hurst, steps, driver_steps, seed(seed_value)))
}

#[wasm_bindgen(js_name = bihariCurve)]
#[allow(clippy::too_many_arguments)]
pub fn bihari_curve(
    a: f64,
    b: f64,
    alpha: f64,
    p: f64,
    modulus: &str,
    delta: f64,
    horizon: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    js(demo::bihari_curve(a, b, alpha, p, modulus, delta, horizon, points))
}
