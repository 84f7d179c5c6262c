//! Reference values computed from first definitions, independent of the crate's builders.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigUint;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/healthcare")
}

/// Row `k` of the normalized Haar matrix, sampled from the Haar function
/// `h_k(t)` on the grid `t = i / N`.
pub fn haar_row(n: usize, k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![1.0; n];
    }
    let p = usize::BITS - 1 - k.leading_zeros();
    let q = k - (1 << p);
    let height = 2f64.powf(p as f64 / 2.0);
    let width = n >> p;
    (0..n)
        .map(|i| {
            let start = q * width;
            if i < start || i >= start + width {
                0.0
            } else if i < start + width / 2 {
                height
            } else {
                -height
            }
        })
        .collect()
}

pub fn haar_dense(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| haar_row(n, k)).collect()
}

/// Natural-order Walsh-Hadamard: `(-1)^popcount(i & j)`.
pub fn walsh_dense(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 }).collect()).collect()
}

/// `ζ / √N · M · x` by plain dot products.
pub fn transform(m: &[Vec<f64>], x: &[f64], zeta: f64) -> Vec<f64> {
    let s = zeta / (x.len() as f64).sqrt();
    m.iter().map(|row| s * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).collect()
}

pub fn hte(x: &[f64], zeta: f64) -> Vec<f64> {
    transform(&haar_dense(x.len()), x, zeta)
}

pub fn zero_entries(m: &[Vec<f64>]) -> usize {
    m.iter().flatten().filter(|v| **v == 0.0).count()
}

/// `g^x` by `x` repeated multiplications.
pub fn naive_pow(g: u64, x: u64) -> BigUint {
    let g = BigUint::from(g);
    let mut acc = BigUint::from(1u32);
    for _ in 0..x {
        acc *= &g;
    }
    acc
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Alphabet position of each letter; zero padded to a power of two.
pub fn letters(word: &str) -> Vec<f64> {
    let mut v: Vec<f64> = word.bytes().map(|b| f64::from(b.to_ascii_lowercase() - b'a' + 1)).collect();
    let n = v.len().max(2).next_power_of_two();
    v.resize(n, 0.0);
    v
}
