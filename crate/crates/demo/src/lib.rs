//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export returns a JSON string; the page parses it and draws on a
//! canvas. The plain functions are public so they can be tested natively.

use maxpoly::poly::{lebesgue_constant, lebesgue_function};
use maxpoly::remez::{compute_b, BOptions};
use maxpoly::{NodeSet, WeightSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest grid the page will ask for; keeps a click under a second.
pub const MAX_INTERVALS: usize = 400;

fn grid(alpha: f64, beta: f64, m: usize) -> Result<NodeSet, String> {
    if m == 0 || m > MAX_INTERVALS {
        return Err(format!("M must lie in 1..={MAX_INTERVALS}"));
    }
    let w = WeightSpec::new(alpha, beta).map_err(|e| e.to_string())?;
    NodeSet::from_weight(&w, m).map_err(|e| e.to_string())
}

fn samples(count: usize) -> impl Iterator<Item = f64> {
    let count = count.clamp(2, 20_000);
    (0..count).map(move |i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
}

/// Nodes and angles for the weight `(1-x)^α (1+x)^β` on `M` subintervals.
pub fn node_layout_json(alpha: f64, beta: f64, m: usize) -> Result<String, String> {
    let nodes = grid(alpha, beta, m)?;
    Ok(json!({ "x": nodes.points(), "theta": nodes.angles() }).to_string())
}

/// `L_Y` sampled on `[-1, 1]`, with its maximum.
pub fn lebesgue_curve_json(
    alpha: f64,
    beta: f64,
    m: usize,
    count: usize,
) -> Result<String, String> {
    let nodes = grid(alpha, beta, m)?;
    let y = nodes.points();
    let xs: Vec<f64> = samples(count).collect();
    let ls: Vec<f64> = xs.iter().map(|&x| lebesgue_function(y, x)).collect();
    let top = lebesgue_constant(y);
    Ok(
        json!({ "nodes": y, "x": xs, "l": ls, "constant": top.value, "argmax_x": top.x })
            .to_string(),
    )
}

/// The maximal polynomial of degree `N`, sampled, with `B(M, N)`.
pub fn maximal_polynomial_json(
    alpha: f64,
    beta: f64,
    m: usize,
    n: usize,
    count: usize,
) -> Result<String, String> {
    let nodes = grid(alpha, beta, m)?;
    let res = compute_b(&nodes, n, &BOptions::default()).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = samples(count).collect();
    let ps: Vec<f64> = xs.iter().map(|&x| res.polynomial.eval(x)).collect();
    let at_nodes: Vec<f64> = nodes
        .points()
        .iter()
        .map(|&x| res.polynomial.eval(x))
        .collect();
    Ok(json!({
        "B": res.b,
        "log10_B": res.log10_b,
        "argmax_x": res.argmax_x,
        "partial": res.partial(),
        "nodes": nodes.points(),
        "node_values": at_nodes,
        "x": xs,
        "p": ps,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn node_layout(alpha: f64, beta: f64, m: usize) -> Result<String, JsError> {
    node_layout_json(alpha, beta, m).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lebesgue_curve(alpha: f64, beta: f64, m: usize, count: usize) -> Result<String, JsError> {
    lebesgue_curve_json(alpha, beta, m, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn maximal_polynomial(
    alpha: f64,
    beta: f64,
    m: usize,
    n: usize,
    count: usize,
) -> Result<String, JsError> {
    maximal_polynomial_json(alpha, beta, m, n, count).map_err(|e| JsError::new(&e))
}
