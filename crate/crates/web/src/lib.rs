//! Browser bindings for the Haar-transform demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Dense matrix plus its operation counts, as JSON.
#[wasm_bindgen]
pub fn matrix_json(kind: &str, l: u32) -> Result<String, JsValue> {
    js(demo::matrix(kind, l))
}

#[wasm_bindgen]
pub fn encrypt_word(word: &str, key: &str, scheme: &str) -> Result<String, JsValue> {
    js(demo::encrypt_word(word, key, scheme))
}

/// Multiplication counts of HTE and WHE per vector length.
#[wasm_bindgen]
pub fn mul_series(l_min: u32, l_max: u32) -> Result<String, JsValue> {
    js(demo::mul_series(l_min, l_max))
}
