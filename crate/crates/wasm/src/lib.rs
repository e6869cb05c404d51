//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string; the plain functions in [`demo`] do the work so they can be tested
//! natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Measured and expected co-occurrence ratio for a sweep of copy
/// probabilities.
#[wasm_bindgen]
pub fn ratio_sweep(
    num_nodes: usize,
    p_intra: f64,
    p_inter: f64,
    p_noise: f64,
    steps: usize,
    seed: u64,
) -> Result<String, JsError> {
    js(demo::ratio_sweep(
        num_nodes, p_intra, p_inter, p_noise, steps, seed,
    ))
}

/// Per-epoch loss trace of a small training run.
#[wasm_bindgen]
pub fn loss_curves(
    num_nodes: usize,
    copy: f64,
    alpha: f64,
    beta: f64,
    dim: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<String, JsError> {
    js(demo::loss_curves(&demo::LossDemo {
        num_nodes,
        copy,
        alpha,
        beta,
        dim,
        epochs,
        lr,
        seed,
    }))
}

/// Attention weights after MANE+ training on a graph whose second view is
/// label-independent noise mixed with `signal` of the first view.
#[wasm_bindgen]
pub fn attention_weights(
    num_nodes: usize,
    signal: f64,
    gamma: f64,
    epochs: usize,
    seed: u64,
) -> Result<String, JsError> {
    js(demo::attention_weights(
        num_nodes, signal, gamma, epochs, seed,
    ))
}
