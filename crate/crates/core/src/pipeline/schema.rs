use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cipher::Scheme;
use crate::codec::{MappingMode, MappingSpec};
use crate::{Error, Result};

/// One vector for the whole column, or one vector per cell (words).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnMode {
    VectorPerColumn,
    VectorPerCell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub mapping: MappingSpec,
    pub mode: ColumnMode,
    pub key_id: String,
    pub scheme: Scheme,
    /// Fixed padded length for `VectorPerColumn`; least power of two when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

impl ColumnSchema {
    pub fn new(name: &str, mapping: MappingSpec, mode: ColumnMode, key_id: &str, scheme: Scheme) -> Self {
        ColumnSchema { name: name.to_owned(), mapping, mode, key_id: key_id.to_owned(), scheme, block: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.mapping.validate()?;
        let word = self.mapping.mode == MappingMode::AlphaWord;
        match (self.mode, word) {
            (ColumnMode::VectorPerCell, false) => {
                return Err(Error::Schema(format!("column {:?}: vector-per-cell requires alpha-word mapping", self.name)))
            }
            (ColumnMode::VectorPerColumn, true) => {
                return Err(Error::Schema(format!("column {:?}: alpha-word cells are vectors; use vector-per-cell", self.name)))
            }
            _ => {}
        }
        if let Some(b) = self.block {
            if self.mode == ColumnMode::VectorPerCell {
                return Err(Error::Schema(format!("column {:?}: block applies to vector-per-column only", self.name)));
            }
            if b < 2 || !b.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(b));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
    /// Timestamp columns must be non-decreasing down the log.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ascending_time: bool,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Self {
        Schema { columns, ascending_time: false }
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for c in &self.columns {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column {:?}", c.name)));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(s)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns.iter().find(|c| c.name == name)
    }
}
