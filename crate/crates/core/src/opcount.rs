//! Operation tallies and benchmark sweeps.
//!
//! Two counting conventions exist. The `Nominal` convention charges one
//! multiplication per nonzero matrix entry visited (and `nonzeros - 1`
//! additions per row) for the orthogonal-transform schemes, and
//! `g^x - 1` multiplications per Paillier exponentiation. The
//! `Implementation` convention charges what square-and-multiply actually
//! performs for the Paillier exponent; the transform counts are the same
//! under both.

use std::fmt;
use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cipher::{self, KeyRecord, Scheme};
use crate::codec::PaddedVector;
use crate::transforms::{self, MatrixKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    Hte,
    Whe,
    Phe,
}

impl From<Scheme> for SchemeTag {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Hte => SchemeTag::Hte,
            Scheme::Whe => SchemeTag::Whe,
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeTag::Hte => "hte",
            SchemeTag::Whe => "whe",
            SchemeTag::Phe => "phe",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Nominal,
    Implementation,
}

/// Running tally of multiplications and additions.
///
/// Counts are big integers: Paillier counts under the nominal convention
/// exceed `10^120` for ordinary two-digit plaintexts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCounter {
    mul: BigUint,
    add: BigUint,
    scheme: Option<SchemeTag>,
    convention: Convention,
    count_scaling: bool,
}

impl OpCounter {
    pub fn new(convention: Convention) -> Self {
        OpCounter { convention, ..Default::default() }
    }

    pub fn nominal() -> Self {
        Self::new(Convention::Nominal)
    }

    pub fn implementation() -> Self {
        Self::new(Convention::Implementation)
    }

    pub fn with_scheme(mut self, scheme: SchemeTag) -> Self {
        self.scheme = Some(scheme);
        self
    }

    /// Also charge the `N` multiplications of the key/normalization scaling
    /// pass in HTE/WHE. Off by default.
    pub fn count_everything(mut self) -> Self {
        self.count_scaling = true;
        self
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn scheme(&self) -> Option<SchemeTag> {
        self.scheme
    }

    pub fn counts_scaling(&self) -> bool {
        self.count_scaling
    }

    pub fn record_mul(&mut self, n: u64) {
        self.mul += n;
    }

    pub fn record_add(&mut self, n: u64) {
        self.add += n;
    }

    pub fn record_mul_big(&mut self, n: &BigUint) {
        self.mul += n;
    }

    pub fn mul(&self) -> &BigUint {
        &self.mul
    }

    pub fn add(&self) -> &BigUint {
        &self.add
    }

    /// Small counts as machine integers; `None` once either tally overflows `u64`.
    pub fn as_u64(&self) -> Option<OpCount> {
        Some(OpCount { mul: self.mul.to_u64()?, add: self.add.to_u64()? })
    }

    pub fn reset(&mut self) {
        self.mul.set_zero();
        self.add.set_zero();
    }
}

/// Multiplication and addition counts of one transform-based operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub mul: u64,
    pub add: u64,
}

impl From<(u64, u64)> for OpCount {
    fn from((mul, add): (u64, u64)) -> Self {
        OpCount { mul, add }
    }
}

fn count_transform(x: &[f64], scheme: Scheme) -> Result<OpCount> {
    let padded = PaddedVector::exact(x.to_vec())?;
    // Unit key: the count does not depend on the key.
    let key = KeyRecord::new("bench", "bench", "1")?;
    let mut counter = OpCounter::nominal().with_scheme(scheme.into());
    cipher::encrypt(&padded, &key, scheme, Some(&mut counter))?;
    Ok(counter.as_u64().expect("transform counts fit in u64"))
}

/// Live HTE tally for one encryption of `x` (length must be a power of two).
pub fn count_hte(x: &[f64]) -> Result<OpCount> {
    count_transform(x, Scheme::Hte)
}

/// Live WHE tally for one encryption of `x` (length must be a power of two).
pub fn count_whe(x: &[f64]) -> Result<OpCount> {
    count_transform(x, Scheme::Whe)
}

/// Bit length beyond which a nominal-convention count is refused.
pub const MAX_COUNT_BITS: u64 = 1 << 24;

/// Multiplications charged for one exponentiation `g^exponent`.
///
/// Nominal convention: `g^exponent - 1`. Implementation convention: the
/// squarings plus extra multiplies of left-to-right binary exponentiation.
pub fn exponentiation_cost(g: &BigUint, exponent: &BigUint, convention: Convention) -> Result<BigUint> {
    if exponent.is_zero() {
        return Ok(BigUint::zero());
    }
    match convention {
        Convention::Nominal => {
            let too_large = || Error::CountTooLarge(format!("{g}^{exponent}"));
            let e = exponent.to_u32().ok_or_else(too_large)?;
            if g.bits().saturating_mul(u64::from(e)) > MAX_COUNT_BITS {
                return Err(too_large());
            }
            Ok(g.pow(e) - 1u32)
        }
        Convention::Implementation => {
            let squarings = exponent.bits() - 1;
            let multiplies = exponent.count_ones() - 1;
            Ok(BigUint::from(squarings + multiplies))
        }
    }
}

/// Paillier cost of encrypting every element of `x` under generator `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PheCount {
    pub mul: BigUint,
    pub add: BigUint,
}

impl PheCount {
    pub fn mul_scientific(&self) -> String {
        scientific(&self.mul, 6)
    }
}

/// Nominal convention: `sum(g^x_i) - N` multiplications, no additions.
pub fn count_phe(x: &[u64], g: &BigUint) -> Result<PheCount> {
    count_phe_with(x, g, Convention::Nominal)
}

pub fn count_phe_with(x: &[u64], g: &BigUint, convention: Convention) -> Result<PheCount> {
    let mut mul = BigUint::zero();
    for &xi in x {
        mul += exponentiation_cost(g, &BigUint::from(xi), convention)?;
    }
    Ok(PheCount { mul, add: BigUint::zero() })
}

/// Renders `value` as `d.ddddde±k` with `digits` significant digits (truncated).
pub fn scientific(value: &BigUint, digits: usize) -> String {
    let s = value.to_str_radix(10);
    if s.len() <= digits.max(1) {
        return s;
    }
    let exp = s.len() - 1;
    let mantissa = &s[..digits.max(1)];
    let (head, tail) = mantissa.split_at(1);
    if tail.is_empty() {
        format!("{head}e{exp}")
    } else {
        format!("{head}.{tail}e{exp}")
    }
}

/// One point of a benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub scheme: SchemeTag,
    pub n: usize,
    pub mul: BigUint,
    pub add: BigUint,
    /// Informational only; machine dependent. Always 0 on wasm32-unknown-unknown.
    pub wall_ms: f64,
}

pub const SWEEP_MIN_LEVEL: u32 = 1;
pub const SWEEP_MAX_LEVEL: u32 = 12;

/// Data vector used for sweep points: `1, 2, ..., N`.
///
/// Transform counts are data independent; the Paillier count is not, and
/// this ramp keeps it reproducible.
pub fn sweep_vector(n: usize) -> Vec<u64> {
    (1..=n as u64).collect()
}

fn check_range(l_min: u32, l_max: u32) -> Result<()> {
    for l in [l_min, l_max] {
        if !(SWEEP_MIN_LEVEL..=SWEEP_MAX_LEVEL).contains(&l) {
            return Err(Error::LevelOutOfRange(l));
        }
    }
    if l_min > l_max {
        return Err(Error::Mapping(format!("empty level range {l_min}..={l_max}")));
    }
    Ok(())
}

/// Multiplication-count comparison of WHE against HTE, one row per scheme and N.
pub fn sweep_transforms(l_min: u32, l_max: u32) -> Result<Vec<BenchRow>> {
    sweep(&[SchemeTag::Whe, SchemeTag::Hte], l_min, l_max, &BigUint::from(22u32), Convention::Nominal)
}

/// Live sweep over the requested schemes. PHE rows use [`sweep_vector`] and generator `g`.
pub fn sweep(schemes: &[SchemeTag], l_min: u32, l_max: u32, g: &BigUint, convention: Convention) -> Result<Vec<BenchRow>> {
    check_range(l_min, l_max)?;
    let mut rows = Vec::new();
    for l in l_min..=l_max {
        let n = 1usize << l;
        let data = sweep_vector(n);
        for &scheme in schemes {
            let start = clock::now();
            let (mul, add) = match scheme {
                SchemeTag::Hte | SchemeTag::Whe => {
                    let x: Vec<f64> = data.iter().map(|&v| v as f64).collect();
                    let c = if scheme == SchemeTag::Hte { count_hte(&x)? } else { count_whe(&x)? };
                    (BigUint::from(c.mul), BigUint::from(c.add))
                }
                SchemeTag::Phe => {
                    let c = count_phe_with(&data, g, convention)?;
                    (c.mul, c.add)
                }
            };
            rows.push(BenchRow {
                scheme,
                n,
                mul,
                add,
                wall_ms: clock::elapsed_ms(start),
            });
        }
    }
    Ok(rows)
}

/// Formula-side counts for a transform kind, for cross-checking live rows.
pub fn formula_counts(scheme: Scheme, l: u32) -> Result<OpCount> {
    let kind = match scheme {
        Scheme::Hte => MatrixKind::HaarNormalized,
        Scheme::Whe => MatrixKind::WalshHadamard,
    };
    transforms::op_count_formulas(kind, l)
}

// `Instant::now` panics on wasm32-unknown-unknown, so timings read 0 there.
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
mod clock {
    use std::time::Instant;

    pub fn now() -> Instant {
        Instant::now()
    }

    pub fn elapsed_ms(start: Instant) -> f64 {
        start.elapsed().as_secs_f64() * 1e3
    }
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
mod clock {
    pub struct Start;

    pub fn now() -> Start {
        Start
    }

    pub fn elapsed_ms(_: Start) -> f64 {
        0.0
    }
}

/// CSV with columns `scheme,N,mul,add` and, with `timing`, `wall_ms`.
/// `mul` is an exact decimal integer.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scheme", "N", "mul", "add"];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut record = vec![r.scheme.to_string(), r.n.to_string(), r.mul.to_str_radix(10), r.add.to_str_radix(10)];
        if timing {
            record.push(format!("{:.3}", r.wall_ms));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Sum of `g^x_i` by straightforward big-integer powers; used as a reference total.
pub fn power_sum(x: &[u64], g: &BigUint) -> BigUint {
    x.iter().fold(BigUint::zero(), |acc, &xi| {
        let mut p = BigUint::one();
        for _ in 0..xi {
            p *= g;
        }
        acc + p
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hte_and_whe_counts_for_small_orders() {
        assert_eq!(count_hte(&[1.0, 2.0, 3.0, 4.0]).unwrap(), OpCount { mul: 12, add: 8 });
        assert_eq!(count_whe(&[1.0, 2.0, 3.0, 4.0]).unwrap(), OpCount { mul: 16, add: 12 });
        assert_eq!(count_whe(&[5.0, -1.0]).unwrap(), OpCount { mul: 4, add: 2 });
        let heart = [72.0, 78.0, 60.0, 75.0, 58.0, 60.0, 90.0, 93.0];
        let case = [1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 2.0, 2.0];
        assert_eq!(count_hte(&heart).unwrap(), OpCount { mul: 32, add: 24 });
        assert_eq!(count_hte(&case).unwrap(), OpCount { mul: 32, add: 24 });
        assert_eq!(count_whe(&heart).unwrap(), OpCount { mul: 64, add: 56 });
    }

    #[test]
    fn non_power_of_two_vector_is_rejected() {
        assert!(matches!(count_hte(&[1.0, 2.0, 3.0]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn phe_counts() {
        let g = BigUint::from(22u32);
        assert_eq!(count_phe(&[1, 2, 1, 2, 1, 1, 2, 2], &g).unwrap().mul, BigUint::from(2016u32));
        assert_eq!(count_phe(&[0], &g).unwrap().mul, BigUint::zero());
        assert_eq!(count_phe(&[], &g).unwrap().mul, BigUint::zero());
        // 13 = 0b1101: 3 squarings + 2 multiplies
        assert_eq!(count_phe_with(&[13], &g, Convention::Implementation).unwrap().mul, BigUint::from(5u32));
        assert_eq!(count_phe_with(&[1], &g, Convention::Implementation).unwrap().mul, BigUint::zero());
        assert!(matches!(count_phe(&[u64::MAX], &g), Err(Error::CountTooLarge(_))));
    }

    #[test]
    fn scientific_rendering() {
        assert_eq!(scientific(&BigUint::from(2016u32), 6), "2016");
        assert_eq!(scientific(&BigUint::from(123456789u32), 3), "1.23e8");
        assert_eq!(scientific(&BigUint::from(500u32), 1), "5e2");
    }

    #[test]
    fn counter_flags() {
        let mut c = OpCounter::implementation().with_scheme(SchemeTag::Phe).count_everything();
        assert_eq!(c.convention(), Convention::Implementation);
        assert_eq!(c.scheme(), Some(SchemeTag::Phe));
        assert!(c.counts_scaling());
        c.record_mul(3);
        c.record_add(2);
        assert_eq!(c.as_u64(), Some(OpCount { mul: 3, add: 2 }));
        c.reset();
        assert!(c.mul().is_zero() && c.add().is_zero());
    }

    #[test]
    fn sweep_range_is_checked() {
        assert!(sweep_transforms(0, 3).is_err());
        assert!(sweep_transforms(2, 13).is_err());
        assert!(sweep_transforms(4, 3).is_err());
        let rows = sweep_transforms(2, 3).unwrap();
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn bench_csv_layout() {
        let rows = sweep(&[SchemeTag::Phe], 1, 1, &BigUint::from(22u32), Convention::Nominal).unwrap();
        let mut buf = Vec::new();
        write_bench_csv(&rows, false, &mut buf).unwrap();
        // x = [1, 2]: 22 + 484 - 2
        assert_eq!(String::from_utf8(buf).unwrap(), "scheme,N,mul,add\nphe,2,504,0\n");
        let mut buf = Vec::new();
        write_bench_csv(&rows, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("scheme,N,mul,add,wall_ms"));
        assert!(lines.next().unwrap().starts_with("phe,2,504,0,"));
    }
}
