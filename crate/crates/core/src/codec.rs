//! Mapping of event-log attribute values to real vectors and back.

use std::fmt;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Smallest block a vector is padded to; `H_2` is the smallest transform.
pub const MIN_BLOCK: usize = 2;

/// Largest allowed gap between a decrypted value and its nearest integer.
pub const INTEGRITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingMode {
    Numeric,
    Timestamp,
    AlphaWord,
    AlphaSymbol,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    Minutes,
    Seconds,
}

impl TimeUnit {
    fn seconds(self) -> i64 {
        match self {
            TimeUnit::Minutes => 60,
            TimeUnit::Seconds => 1,
        }
    }
}

/// Letters only, or letters plus space (27) and digits 0-9 (28-37).
///
/// The extended alphabet is an addition of this crate; the strict one is
/// plain alphabetical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    #[default]
    Strict,
    Extended,
}

const DATETIME_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%d %H:%M"];
const TIME_FORMATS: [&str; 2] = ["%H:%M:%S", "%H:%M"];

/// Parses an ISO-8601 style datetime, or a bare time of day placed on `date`.
pub fn parse_datetime(s: &str, date: Option<NaiveDate>) -> Option<NaiveDateTime> {
    let s = s.trim();
    DATETIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            let d = date?;
            TIME_FORMATS.iter().find_map(|f| NaiveTime::parse_from_str(s, f).ok()).map(|t| d.and_time(t))
        })
}

fn ser_origin<S: Serializer>(v: &Option<NaiveDateTime>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(dt) => s.serialize_str(&dt.format("%Y-%m-%dT%H:%M:%S").to_string()),
        None => s.serialize_none(),
    }
}

fn de_origin<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<NaiveDateTime>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    raw.map(|s| parse_datetime(&s, None).ok_or_else(|| serde::de::Error::custom(format!("bad time origin {s:?}"))))
        .transpose()
}

/// How one column's cells become numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSpec {
    pub mode: MappingMode,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_origin",
        deserialize_with = "de_origin"
    )]
    pub time_origin: Option<NaiveDateTime>,
    #[serde(default)]
    pub time_unit: TimeUnit,
    /// chrono format used to parse and render timestamps; ISO-8601 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_format: Option<String>,
    #[serde(default, skip_serializing_if = "is_strict")]
    pub alphabet: Alphabet,
}

fn is_strict(a: &Alphabet) -> bool {
    *a == Alphabet::Strict
}

impl MappingSpec {
    pub fn new(mode: MappingMode) -> Self {
        MappingSpec { mode, time_origin: None, time_unit: TimeUnit::Minutes, time_format: None, alphabet: Alphabet::Strict }
    }

    pub fn numeric() -> Self {
        Self::new(MappingMode::Numeric)
    }

    pub fn alpha_word() -> Self {
        Self::new(MappingMode::AlphaWord)
    }

    pub fn alpha_symbol() -> Self {
        Self::new(MappingMode::AlphaSymbol)
    }

    pub fn timestamp(origin: NaiveDateTime, unit: TimeUnit) -> Self {
        MappingSpec { time_origin: Some(origin), time_unit: unit, ..Self::new(MappingMode::Timestamp) }
    }

    pub fn with_time_format(mut self, fmt: &str) -> Self {
        self.time_format = Some(fmt.to_owned());
        self
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == MappingMode::Timestamp && self.time_origin.is_none() {
            return Err(Error::Mapping("timestamp mapping requires a time_origin".into()));
        }
        Ok(())
    }

    fn origin(&self) -> Result<NaiveDateTime> {
        self.time_origin.ok_or_else(|| Error::Mapping("timestamp mapping requires a time_origin".into()))
    }

    /// Parses a timestamp cell; bare times of day are placed on the origin's date.
    pub fn parse_timestamp(&self, s: &str) -> Result<NaiveDateTime> {
        let origin = self.origin()?;
        if let Some(fmt) = &self.time_format {
            if let Ok(dt) = NaiveDateTime::parse_from_str(s.trim(), fmt) {
                return Ok(dt);
            }
            if let Ok(t) = NaiveTime::parse_from_str(s.trim(), fmt) {
                return Ok(origin.date().and_time(t));
            }
        }
        parse_datetime(s, Some(origin.date())).ok_or_else(|| Error::Mapping(format!("unparseable timestamp {s:?}")))
    }

    pub fn format_timestamp(&self, ts: &NaiveDateTime) -> String {
        match &self.time_format {
            Some(fmt) => ts.format(fmt).to_string(),
            None => ts.format("%Y-%m-%dT%H:%M:%S").to_string(),
        }
    }
}

/// A vector zero padded to a power-of-two length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddedVector {
    values: Vec<f64>,
    payload_len: usize,
}

impl PaddedVector {
    /// Wraps a vector whose length is already a power of two (at least 2); no padding.
    pub fn exact(values: Vec<f64>) -> Result<Self> {
        Self::from_parts(values, 0)
    }

    /// Rebuilds a vector whose last `pad_len` entries are padding.
    pub fn from_parts(values: Vec<f64>, pad_len: usize) -> Result<Self> {
        let n = values.len();
        if n < MIN_BLOCK || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if pad_len > n {
            return Err(Error::BlockTooSmall { block: n, len: pad_len });
        }
        Ok(PaddedVector { values, payload_len: n - pad_len })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn pad_len(&self) -> usize {
        self.values.len() - self.payload_len
    }

    /// `log2` of the padded length.
    pub fn level(&self) -> u32 {
        self.values.len().trailing_zeros()
    }

    pub fn payload(&self) -> &[f64] {
        &self.values[..self.payload_len]
    }
}

/// Zero pads `x` to `block`, or to the least power of two `>= len(x)` (at least 2).
pub fn pad_to_block(x: &[f64], block: Option<usize>) -> Result<PaddedVector> {
    let n = match block {
        Some(b) => {
            if b < MIN_BLOCK || !b.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(b));
            }
            if b < x.len() {
                return Err(Error::BlockTooSmall { block: b, len: x.len() });
            }
            b
        }
        None => x.len().next_power_of_two().max(MIN_BLOCK),
    };
    let mut values = Vec::with_capacity(n);
    values.extend_from_slice(x);
    values.resize(n, 0.0);
    Ok(PaddedVector { values, payload_len: x.len() })
}

/// Elapsed whole time units from the origin.
pub fn map_timestamp(ts: &NaiveDateTime, spec: &MappingSpec) -> Result<f64> {
    let origin = spec.origin()?;
    if *ts < origin {
        return Err(Error::BeforeOrigin { ts: ts.to_string(), origin: origin.to_string() });
    }
    let secs = (*ts - origin).num_seconds();
    Ok((secs / spec.time_unit.seconds()) as f64)
}

fn char_code(c: char, alphabet: Alphabet) -> Result<u32> {
    match c {
        'a'..='z' => Ok(c as u32 - 'a' as u32 + 1),
        'A'..='Z' => Ok(c as u32 - 'A' as u32 + 1),
        ' ' if alphabet == Alphabet::Extended => Ok(27),
        '0'..='9' if alphabet == Alphabet::Extended => Ok(c as u32 - '0' as u32 + 28),
        _ => Err(Error::NonAlphabetic(c)),
    }
}

fn code_char(code: i64, alphabet: Alphabet, upper: bool) -> Result<char> {
    let base = if upper { b'A' } else { b'a' };
    match code {
        1..=26 => Ok((base + (code - 1) as u8) as char),
        27 if alphabet == Alphabet::Extended => Ok(' '),
        28..=37 if alphabet == Alphabet::Extended => Ok((b'0' + (code - 28) as u8) as char),
        _ => Err(Error::SymbolOutOfRange(code)),
    }
}

/// Alphabet positions of a word's characters, zero padded (`"Tom" → [20, 15, 13, 0]`).
pub fn map_word(word: &str, spec: &MappingSpec) -> Result<PaddedVector> {
    if word.is_empty() {
        return Err(Error::Mapping("empty word".into()));
    }
    let codes = word.chars().map(|c| char_code(c, spec.alphabet).map(f64::from)).collect::<Result<Vec<_>>>()?;
    pad_to_block(&codes, None)
}

/// Single letter to its alphabet position, case-insensitively.
pub fn map_activity_symbol(symbol: &str) -> Result<f64> {
    let mut chars = symbol.trim().chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(f64::from(char_code(c, Alphabet::Strict)?)),
        _ => Err(Error::Mapping(format!("expected a single letter, got {symbol:?}"))),
    }
}

/// A decoded attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Text(String),
    Time(NaiveDateTime),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
            Value::Time(t) => write!(f, "{}", t.format("%Y-%m-%dT%H:%M:%S")),
        }
    }
}

/// Rounds `v` to an integer, failing when the residual exceeds [`INTEGRITY_TOLERANCE`].
pub fn round_checked(index: usize, v: f64) -> Result<i64> {
    let r = v.round();
    if !v.is_finite() || (v - r).abs() > INTEGRITY_TOLERANCE || r.abs() > 9.0e15 {
        return Err(Error::Integrity { index, value: v });
    }
    Ok(r as i64)
}

/// Inverse of the mappings for a decrypted vector.
///
/// Every entry, padding included, must be within tolerance of an integer;
/// padding must round to zero. `AlphaWord` yields a single lowercase
/// [`Value::Text`]; `AlphaSymbol` yields one uppercase letter per entry.
pub fn unmap(values: &[f64], spec: &MappingSpec, payload_len: usize) -> Result<Vec<Value>> {
    if payload_len > values.len() {
        return Err(Error::LengthMismatch { expected: values.len(), got: payload_len });
    }
    let ints = values.iter().enumerate().map(|(i, &v)| round_checked(i, v)).collect::<Result<Vec<_>>>()?;
    if let Some(i) = (payload_len..ints.len()).find(|&i| ints[i] != 0) {
        return Err(Error::Integrity { index: i, value: values[i] });
    }
    let payload = &ints[..payload_len];
    match spec.mode {
        MappingMode::Numeric => Ok(payload.iter().map(|&v| Value::Int(v)).collect()),
        MappingMode::AlphaWord => {
            let word = payload.iter().map(|&c| code_char(c, spec.alphabet, false)).collect::<Result<String>>()?;
            Ok(vec![Value::Text(word)])
        }
        MappingMode::AlphaSymbol => payload
            .iter()
            .map(|&c| code_char(c, Alphabet::Strict, true).map(|ch| Value::Text(ch.to_string())))
            .collect(),
        MappingMode::Timestamp => {
            let origin = spec.origin()?;
            payload
                .iter()
                .map(|&u| {
                    if u < 0 {
                        return Err(Error::SymbolOutOfRange(u));
                    }
                    Ok(Value::Time(origin + Duration::seconds(u * spec.time_unit.seconds())))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midnight() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2024, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn at(h: u32, m: u32) -> NaiveDateTime {
        midnight().date().and_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn timestamps() {
        let spec = MappingSpec::timestamp(midnight(), TimeUnit::Minutes);
        assert_eq!(map_timestamp(&at(10, 20), &spec).unwrap(), 620.0);
        assert_eq!(map_timestamp(&midnight(), &spec).unwrap(), 0.0);
        assert_eq!(map_timestamp(&at(19, 24), &spec).unwrap(), 1164.0);
        let secs = MappingSpec::timestamp(midnight(), TimeUnit::Seconds);
        assert_eq!(map_timestamp(&at(0, 2), &secs).unwrap(), 120.0);
        let late = MappingSpec::timestamp(at(11, 0), TimeUnit::Minutes);
        assert!(matches!(map_timestamp(&at(10, 20), &late), Err(Error::BeforeOrigin { .. })));
        assert!(map_timestamp(&at(1, 0), &MappingSpec::numeric()).is_err());
        assert!(MappingSpec::new(MappingMode::Timestamp).validate().is_err());
    }

    #[test]
    fn timestamp_parsing() {
        let spec = MappingSpec::timestamp(midnight(), TimeUnit::Minutes).with_time_format("%H:%M");
        assert_eq!(spec.parse_timestamp("10:20").unwrap(), at(10, 20));
        assert_eq!(spec.parse_timestamp("2024-03-01T11:31:00").unwrap(), at(11, 31));
        assert_eq!(spec.format_timestamp(&at(9, 5)), "09:05");
        assert!(spec.parse_timestamp("noon").is_err());
    }

    #[test]
    fn words() {
        let spec = MappingSpec::alpha_word();
        let tom = map_word("Tom", &spec).unwrap();
        assert_eq!(tom.values(), &[20.0, 15.0, 13.0, 0.0]);
        assert_eq!((tom.payload_len(), tom.len(), tom.pad_len()), (3, 4, 1));
        assert_eq!(map_word("Anna", &spec).unwrap().values(), &[1.0, 14.0, 14.0, 1.0]);
        let a = map_word("A", &spec).unwrap();
        assert_eq!(a.values(), &[1.0, 0.0]);
        assert!(matches!(map_word("Jo hn", &spec), Err(Error::NonAlphabetic(' '))));
        assert!(map_word("", &spec).is_err());
        let ext = MappingSpec::alpha_word().with_alphabet(Alphabet::Extended);
        assert_eq!(map_word("a 0", &ext).unwrap().values(), &[1.0, 27.0, 28.0, 0.0]);
    }

    #[test]
    fn symbols() {
        assert_eq!(map_activity_symbol("A").unwrap(), 1.0);
        assert_eq!(map_activity_symbol("E").unwrap(), 5.0);
        assert_eq!(map_activity_symbol("a").unwrap(), 1.0);
        assert!(matches!(map_activity_symbol("7"), Err(Error::NonAlphabetic('7'))));
        assert!(map_activity_symbol("AB").is_err());
        assert!(map_activity_symbol("").is_err());
    }

    #[test]
    fn padding() {
        let p = pad_to_block(&[1.0; 5], None).unwrap();
        assert_eq!((p.len(), p.pad_len()), (8, 3));
        assert_eq!(&p.values()[5..], &[0.0; 3]);
        let p = pad_to_block(&[1.0; 8], None).unwrap();
        assert_eq!((p.len(), p.pad_len()), (8, 0));
        let p = pad_to_block(&[1.0; 3], Some(8)).unwrap();
        assert_eq!((p.len(), p.pad_len()), (8, 5));
        assert!(matches!(pad_to_block(&[1.0; 3], Some(6)), Err(Error::NotPowerOfTwo(6))));
        assert!(matches!(pad_to_block(&[1.0; 5], Some(4)), Err(Error::BlockTooSmall { .. })));
        assert_eq!(pad_to_block(&[], None).unwrap().len(), 2);
    }

    #[test]
    fn unmapping() {
        let word = unmap(&[20.0000001, 15.0, 13.0, 0.0], &MappingSpec::alpha_word(), 3).unwrap();
        assert_eq!(word, vec![Value::Text("tom".into())]);
        let spec = MappingSpec::timestamp(midnight(), TimeUnit::Minutes);
        assert_eq!(unmap(&[620.0, 0.0], &spec, 1).unwrap(), vec![Value::Time(at(10, 20))]);
        let ints = unmap(&[1., 2., 1., 2., 1., 1., 2., 2.], &MappingSpec::numeric(), 8).unwrap();
        assert_eq!(ints, [1, 2, 1, 2, 1, 1, 2, 2].map(Value::Int).to_vec());
        let sym = unmap(&[1.0, 5.0], &MappingSpec::alpha_symbol(), 2).unwrap();
        assert_eq!(sym, vec![Value::Text("A".into()), Value::Text("E".into())]);
    }

    #[test]
    fn unmap_failures() {
        assert!(matches!(unmap(&[20.4, 0.0], &MappingSpec::numeric(), 1), Err(Error::Integrity { index: 0, .. })));
        assert!(matches!(unmap(&[20.0, 3.0], &MappingSpec::numeric(), 1), Err(Error::Integrity { index: 1, .. })));
        assert!(matches!(unmap(&[27.0, 0.0], &MappingSpec::alpha_word(), 1), Err(Error::SymbolOutOfRange(27))));
        assert!(matches!(unmap(&[0.0, 0.0], &MappingSpec::alpha_symbol(), 1), Err(Error::SymbolOutOfRange(0))));
        assert!(unmap(&[f64::NAN, 0.0], &MappingSpec::numeric(), 1).is_err());
        assert!(unmap(&[1.0, 0.0], &MappingSpec::numeric(), 3).is_err());
    }

    #[test]
    fn mapping_spec_json() {
        let spec: MappingSpec =
            serde_json::from_str(r#"{"mode":"timestamp","time_origin":"2024-03-01T00:00:00","time_unit":"minutes"}"#)
                .unwrap();
        assert_eq!(spec, MappingSpec::timestamp(midnight(), TimeUnit::Minutes));
        let back: MappingSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let w: MappingSpec = serde_json::from_str(r#"{"mode":"alpha-word"}"#).unwrap();
        assert_eq!(w, MappingSpec::alpha_word());
        assert!(serde_json::from_str::<MappingSpec>(r#"{"mode":"timestamp","time_origin":"yesterday"}"#).is_err());
    }
}
