//! HTE and WHE: `y = ζ · (1/√N) · M · x` under a real scalar key `ζ`.
//!
//! `M` is the normalized Haar matrix for HTE and the Sylvester
//! Walsh-Hadamard matrix for WHE. Both satisfy `(1/N)·M·Mᵀ = I`, so
//! decryption is `x = (1/ζ) · (1/√N) · Mᵀ · y`.
//!
//! There is no authentication tag: a ciphertext is bound to a key only by
//! its `key_id`, which decryption checks before doing any arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::PaddedVector;
use crate::opcount::OpCounter;
use crate::transforms::{self, MatrixKind, TransformMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "HTE", alias = "hte")]
    Hte,
    #[serde(rename = "WHE", alias = "whe")]
    Whe,
}

impl Scheme {
    pub fn matrix_kind(self) -> MatrixKind {
        match self {
            Scheme::Hte => MatrixKind::HaarNormalized,
            Scheme::Whe => MatrixKind::WalshHadamard,
        }
    }

    pub fn matrix(self, l: u32) -> Result<TransformMatrix> {
        transforms::build(self.matrix_kind(), l)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Hte => "HTE",
            Scheme::Whe => "WHE",
        })
    }
}

/// Evaluates `c`, `sqrt(d)` or `c*sqrt(d)` (optional sign, whitespace ignored).
pub fn parse_key_expr(expr: &str) -> Result<f64> {
    let bad = || Error::KeyParse(expr.to_owned());
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let (coef, root) = match compact.find("sqrt(") {
        Some(pos) => {
            let inner = compact[pos + 5..].strip_suffix(')').ok_or_else(bad)?;
            let d: f64 = inner.parse().map_err(|_| bad())?;
            if d < 0.0 {
                return Err(bad());
            }
            let head = &compact[..pos];
            let c = match head.strip_suffix('*').unwrap_or(head) {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse().map_err(|_| bad())?,
            };
            (c, d.sqrt())
        }
        None => (compact.parse().map_err(|_| bad())?, 1.0),
    };
    let v: f64 = coef * root;
    if !v.is_finite() {
        return Err(bad());
    }
    if v == 0.0 {
        return Err(Error::ZeroKey);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum KeyValueRepr {
    Expr(String),
    Number(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawKey {
    id: String,
    owner: String,
    value: KeyValueRepr,
    #[serde(default)]
    granted_to: BTreeSet<String>,
}

/// A named nonzero scalar key with its owner and grant list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKey", into = "RawKey")]
pub struct KeyRecord {
    key_id: String,
    owner: String,
    expr: String,
    value: f64,
    granted_to: BTreeSet<String>,
}

impl TryFrom<RawKey> for KeyRecord {
    type Error = Error;

    fn try_from(raw: RawKey) -> Result<Self> {
        let expr = match raw.value {
            KeyValueRepr::Expr(s) => s,
            KeyValueRepr::Number(v) => v.to_string(),
        };
        Ok(KeyRecord::new(&raw.id, &raw.owner, &expr)?.with_grants(raw.granted_to))
    }
}

impl From<KeyRecord> for RawKey {
    fn from(k: KeyRecord) -> Self {
        RawKey { id: k.key_id, owner: k.owner, value: KeyValueRepr::Expr(k.expr), granted_to: k.granted_to }
    }
}

impl KeyRecord {
    pub fn new(key_id: &str, owner: &str, expr: &str) -> Result<Self> {
        let value = parse_key_expr(expr)?;
        Ok(KeyRecord {
            key_id: key_id.to_owned(),
            owner: owner.to_owned(),
            expr: expr.trim().to_owned(),
            value,
            granted_to: BTreeSet::new(),
        })
    }

    pub fn with_grants<I, S>(mut self, orgs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.granted_to.extend(orgs.into_iter().map(Into::into));
        self
    }

    pub fn grant(&mut self, org: &str) {
        self.granted_to.insert(org.to_owned());
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    /// The exact expression the key was parsed from.
    pub fn expr(&self) -> &str {
        &self.expr
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn granted_to(&self) -> &BTreeSet<String> {
        &self.granted_to
    }

    /// Owner or grantee.
    pub fn accessible_by(&self, org: &str) -> bool {
        self.owner == org || self.granted_to.contains(org)
    }
}

/// Encrypted payload of one padded vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherVector {
    pub values: Vec<f64>,
    pub scheme: Scheme,
    pub key_id: String,
    pub l: u32,
    pub pad_len: usize,
}

impl CipherVector {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn payload_len(&self) -> usize {
        self.values.len() - self.pad_len
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if 1usize << self.l != n {
            return Err(Error::LengthMismatch { expected: 1 << self.l, got: n });
        }
        if self.pad_len > n {
            return Err(Error::BlockTooSmall { block: n, len: self.pad_len });
        }
        Ok(())
    }
}

fn scale_counted(v: &mut [f64], factor: f64, counter: &mut Option<&mut OpCounter>) {
    for x in v.iter_mut() {
        *x *= factor;
    }
    if let Some(c) = counter.as_deref_mut() {
        if c.counts_scaling() {
            c.record_mul(v.len() as u64);
        }
    }
}

/// `y = ζ · (1/√N) · M · x`.
///
/// The counter receives the matrix-vector tally only, unless it was built
/// with [`OpCounter::count_everything`], which adds `N` multiplications
/// for the scaling pass.
pub fn encrypt(x: &PaddedVector, key: &KeyRecord, scheme: Scheme, mut counter: Option<&mut OpCounter>) -> Result<CipherVector> {
    let l = x.level();
    let m = scheme.matrix(l)?;
    let mut y = transforms::apply(&m, x.values(), counter.as_deref_mut())?;
    let factor = key.value / (x.len() as f64).sqrt();
    scale_counted(&mut y, factor, &mut counter);
    Ok(CipherVector { values: y, scheme, key_id: key.key_id.clone(), l, pad_len: x.pad_len() })
}

/// `x = (1/ζ) · (1/√N) · Mᵀ · y`, after checking that `key` is the one `y` is bound to.
pub fn decrypt(y: &CipherVector, key: &KeyRecord, counter: Option<&mut OpCounter>) -> Result<PaddedVector> {
    if y.key_id != key.key_id {
        return Err(Error::KeyMismatch { expected: y.key_id.clone(), got: key.key_id.clone() });
    }
    decrypt_unchecked(y, key.value, counter)
}

/// Decrypts with an arbitrary key value, skipping the key-id check.
pub fn decrypt_unchecked(y: &CipherVector, key_value: f64, mut counter: Option<&mut OpCounter>) -> Result<PaddedVector> {
    if key_value == 0.0 {
        return Err(Error::ZeroKey);
    }
    y.check_shape()?;
    let m = y.scheme.matrix(y.l)?;
    let mut x = transforms::apply_transpose(&m, &y.values, counter.as_deref_mut())?;
    let factor = 1.0 / (key_value * (y.order() as f64).sqrt());
    scale_counted(&mut x, factor, &mut counter);
    PaddedVector::from_parts(x, y.pad_len)
}

/// Moves `y` from `old` to `new` by rescaling with `new / old`.
pub fn reencrypt(y: &CipherVector, old: &KeyRecord, new: &KeyRecord) -> Result<CipherVector> {
    if y.key_id != old.key_id {
        return Err(Error::KeyMismatch { expected: y.key_id.clone(), got: old.key_id.clone() });
    }
    let factor = new.value / old.value;
    Ok(CipherVector {
        values: y.values.iter().map(|v| v * factor).collect(),
        key_id: new.key_id.clone(),
        ..y.clone()
    })
}
