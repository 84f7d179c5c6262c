//! Plain-Rust bodies of the browser operations; the wasm exports wrap these.

use htelog::cipher::{self, KeyRecord, Scheme};
use htelog::codec::{self, MappingSpec, Value};
use htelog::opcount::{self, SchemeTag};
use htelog::transforms::{self, MatrixKind};
use serde::Serialize;

/// Largest level the page renders as a heatmap.
pub const MAX_DEMO_LEVEL: u32 = 7;

#[derive(Debug, Serialize)]
pub struct MatrixView {
    pub kind: String,
    pub n: usize,
    pub values: Vec<Vec<f64>>,
    pub zeros: usize,
    pub mul: u64,
    pub add: u64,
}

#[derive(Debug, Serialize)]
pub struct WordDemo {
    pub word: String,
    pub key: f64,
    pub plaintext: Vec<f64>,
    pub ciphertext: Vec<f64>,
    pub decrypted: String,
    /// Outcome of decrypting with a key off by 1%.
    pub wrong_key: String,
}

#[derive(Debug, Serialize)]
pub struct Series {
    pub n: Vec<usize>,
    pub hte: Vec<u64>,
    pub whe: Vec<u64>,
}

fn kind(name: &str) -> Result<MatrixKind, String> {
    match name {
        "haar" => Ok(MatrixKind::HaarNormalized),
        "haar-raw" => Ok(MatrixKind::HaarUnnormalized),
        "wh" => Ok(MatrixKind::WalshHadamard),
        other => Err(format!("unknown matrix kind {other:?}")),
    }
}

fn scheme(name: &str) -> Result<Scheme, String> {
    match name.to_ascii_lowercase().as_str() {
        "hte" => Ok(Scheme::Hte),
        "whe" => Ok(Scheme::Whe),
        other => Err(format!("unknown scheme {other:?}")),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn matrix(kind_name: &str, l: u32) -> Result<String, String> {
    if l == 0 || l > MAX_DEMO_LEVEL {
        return Err(format!("level must be 1..={MAX_DEMO_LEVEL}"));
    }
    let k = kind(kind_name)?;
    let m = transforms::build(k, l).map_err(|e| e.to_string())?;
    let counts = transforms::op_count_formulas(k, l).map_err(|e| e.to_string())?;
    json(&MatrixView {
        kind: k.to_string(),
        n: m.order(),
        values: m.to_dense(),
        zeros: m.zeros(),
        mul: counts.mul,
        add: counts.add,
    })
}

pub fn encrypt_word(word: &str, key_expr: &str, scheme_name: &str) -> Result<String, String> {
    let spec = MappingSpec::alpha_word();
    let key = KeyRecord::new("demo", "browser", key_expr).map_err(|e| e.to_string())?;
    let s = scheme(scheme_name)?;
    let x = codec::map_word(word.trim(), &spec).map_err(|e| e.to_string())?;
    let y = cipher::encrypt(&x, &key, s, None).map_err(|e| e.to_string())?;
    let back = cipher::decrypt(&y, &key, None).map_err(|e| e.to_string())?;
    let decrypted = match codec::unmap(back.values(), &spec, back.payload_len()).map_err(|e| e.to_string())?.pop() {
        Some(Value::Text(w)) => w,
        other => return Err(format!("unexpected decryption {other:?}")),
    };
    let off = cipher::decrypt_unchecked(&y, key.value() * 1.01, None).map_err(|e| e.to_string())?;
    let wrong_key = match codec::unmap(off.values(), &spec, off.payload_len()) {
        Ok(mut v) => v.pop().map(|v| v.to_string()).unwrap_or_default(),
        Err(e) => format!("rejected: {e}"),
    };
    json(&WordDemo {
        word: word.trim().to_owned(),
        key: key.value(),
        plaintext: x.values().to_vec(),
        ciphertext: y.values,
        decrypted,
        wrong_key,
    })
}

pub fn mul_series(l_min: u32, l_max: u32) -> Result<String, String> {
    let rows = opcount::sweep_transforms(l_min, l_max).map_err(|e| e.to_string())?;
    let pick = |tag| rows.iter().filter(move |r| r.scheme == tag).map(|r| r.mul.to_u64_digits().first().copied().unwrap_or(0));
    json(&Series {
        n: rows.iter().filter(|r| r.scheme == SchemeTag::Hte).map(|r| r.n).collect(),
        hte: pick(SchemeTag::Hte).collect(),
        whe: pick(SchemeTag::Whe).collect(),
    })
}
