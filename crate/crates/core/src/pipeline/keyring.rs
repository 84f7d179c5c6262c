use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cipher::KeyRecord;
use crate::{Error, Result};

/// Placeholder accepted in key files in place of an expression; resolved from the seed.
pub const RANDOM_KEY: &str = "random";

/// Range random keys are drawn from.
pub const RANDOM_KEY_RANGE: (f64, f64) = (1.0, 1000.0);

/// A uniform key in [`RANDOM_KEY_RANGE`], rendered as an exact decimal expression.
pub fn random_key_expr<R: Rng + ?Sized>(rng: &mut R) -> String {
    let (lo, hi) = RANDOM_KEY_RANGE;
    let v: f64 = rng.gen_range(lo..hi);
    format!("{v}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "creator-trusted", alias = "creator")]
    Creator,
    #[serde(rename = "intermediate-untrusted", alias = "intermediate")]
    Intermediate,
    #[serde(rename = "pm-point-trusted", alias = "pm-point")]
    PmPoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Organization {
    pub id: String,
    pub role: Role,
}

impl Organization {
    pub fn new(id: &str, role: Role) -> Self {
        Organization { id: id.to_owned(), role }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRing")]
pub struct KeyRing {
    keys: Vec<KeyRecord>,
}

#[derive(Deserialize)]
struct RawRing {
    keys: Vec<KeyRecord>,
}

impl TryFrom<RawRing> for KeyRing {
    type Error = Error;

    fn try_from(raw: RawRing) -> Result<Self> {
        KeyRing::new(raw.keys)
    }
}

impl KeyRing {
    pub fn new(keys: Vec<KeyRecord>) -> Result<Self> {
        let mut ring = KeyRing::default();
        for k in keys {
            ring.insert(k)?;
        }
        Ok(ring)
    }

    pub fn insert(&mut self, key: KeyRecord) -> Result<()> {
        if self.get(key.key_id()).is_some() {
            return Err(Error::DuplicateKey(key.key_id().to_owned()));
        }
        self.keys.push(key);
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Like [`KeyRing::from_json`], but `"value": "random"` entries are drawn from `rng`.
    pub fn from_json_resolving<R: Rng + ?Sized>(s: &str, rng: &mut R) -> Result<Self> {
        Self::from_value_resolving(serde_json::from_str(s)?, rng)
    }

    pub fn from_value_resolving<R: Rng + ?Sized>(mut doc: serde_json::Value, rng: &mut R) -> Result<Self> {
        if let Some(keys) = doc.get_mut("keys").and_then(|k| k.as_array_mut()) {
            for key in keys {
                if key.get("value").and_then(|v| v.as_str()) == Some(RANDOM_KEY) {
                    key["value"] = serde_json::Value::String(random_key_expr(rng));
                }
            }
        }
        Ok(serde_json::from_value(doc)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn get(&self, key_id: &str) -> Option<&KeyRecord> {
        self.keys.iter().find(|k| k.key_id() == key_id)
    }

    pub fn require(&self, key_id: &str) -> Result<&KeyRecord> {
        self.get(key_id).ok_or_else(|| Error::UnknownKey(key_id.to_owned()))
    }

    pub fn keys(&self) -> &[KeyRecord] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Keys `org` owns or was granted.
    pub fn subset_for(&self, org: &str) -> KeyRing {
        KeyRing { keys: self.keys.iter().filter(|k| k.accessible_by(org)).cloned().collect() }
    }

    pub fn key_ids(&self) -> BTreeSet<&str> {
        self.keys.iter().map(|k| k.key_id()).collect()
    }

    pub fn can_access(&self, org: &str, key_id: &str) -> bool {
        self.get(key_id).is_some_and(|k| k.accessible_by(org))
    }
}
