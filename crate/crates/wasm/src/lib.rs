//! Browser bindings for the stroke-tree demo page in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string,
//! so the page needs no bundler. The work happens in [`demo`], which is
//! ordinary Rust and tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// DFS elements of both trees, the full DP table and all three distances.
#[wasm_bindgen]
pub fn distance_table(a: &str, b: &str, alpha: f64, beta: f64) -> Result<String, JsValue> {
    js(demo::distance_table(a, b, alpha, beta))
}

/// Lexicon candidates ranked by the combined distance to `expr`.
#[wasm_bindgen]
pub fn rectify_ranked(expr: &str, lexicon: &str, alpha: f64, beta: f64, top_k: usize) -> Result<String, JsValue> {
    js(demo::rectify_ranked(expr, lexicon, alpha, beta, top_k))
}

/// A corrupted copy of `expr`.
#[wasm_bindgen]
pub fn perturb_expr(
    expr: &str,
    p_sub: f64,
    p_del: f64,
    p_ins: f64,
    p_struct: f64,
    seed: u64,
    trial: u64,
) -> Result<String, JsValue> {
    js(demo::perturb_expr(expr, p_sub, p_del, p_ins, p_struct, seed, trial))
}

#[wasm_bindgen]
pub fn sample_lexicon(count: usize, seed: u64) -> String {
    demo::sample_lexicon(count, seed)
}
