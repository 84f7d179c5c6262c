use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cipher::{self, CipherVector, KeyRecord};
use crate::codec::{self, MappingMode, Value};
use crate::opcount::OpCounter;
use crate::pipeline::{parse_cell, render_cell, ColumnMode, ColumnSchema, EventLog, KeyRing, Schema};
use crate::{Error, Result};

pub const FORMAT: &str = "htelog/1";

/// Largest integer magnitude an `f64` carries exactly.
const MAX_EXACT_INT: i64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Column { vector: CipherVector },
    Cells { vectors: Vec<CipherVector> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncryptedColumn {
    pub schema: ColumnSchema,
    /// Organization that encrypted the column.
    pub added_by: String,
    pub payload: Payload,
}

/// Column-wise ciphertext of an event log. Key values are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncryptedLog {
    pub format: String,
    pub rows: usize,
    pub columns: Vec<EncryptedColumn>,
}

impl EncryptedLog {
    pub fn column(&self, name: &str) -> Option<&EncryptedColumn> {
        self.columns.iter().find(|c| c.schema.name == name)
    }

    pub fn schema(&self) -> Schema {
        Schema::new(self.columns.iter().map(|c| c.schema.clone()).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let log: EncryptedLog = serde_json::from_str(s)?;
        if log.format != FORMAT {
            return Err(Error::Schema(format!("unsupported format {:?}", log.format)));
        }
        log.schema().validate()?;
        Ok(log)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn to_number(column: &ColumnSchema, value: &Value) -> Result<f64> {
    let spec = &column.mapping;
    match (spec.mode, value) {
        (MappingMode::Numeric, Value::Int(v)) if v.abs() <= MAX_EXACT_INT => Ok(*v as f64),
        (MappingMode::Numeric, Value::Int(v)) => Err(Error::Mapping(format!("{v} is not exactly representable"))),
        (MappingMode::Timestamp, Value::Time(t)) => codec::map_timestamp(t, spec),
        (MappingMode::AlphaSymbol, Value::Text(s)) => codec::map_activity_symbol(s),
        _ => Err(Error::Mapping(format!("value {value} does not fit column {:?}", column.name))),
    }
}

/// Encrypts one column's cells under `key`.
pub fn encrypt_column(
    column: &ColumnSchema,
    values: &[&Value],
    key: &KeyRecord,
    mut counter: Option<&mut OpCounter>,
) -> Result<Payload> {
    if key.key_id() != column.key_id {
        return Err(Error::KeyMismatch { expected: column.key_id.clone(), got: key.key_id().to_owned() });
    }
    match column.mode {
        ColumnMode::VectorPerColumn => {
            let xs = values.iter().map(|v| to_number(column, v)).collect::<Result<Vec<_>>>()?;
            let padded = codec::pad_to_block(&xs, column.block)?;
            let vector = cipher::encrypt(&padded, key, column.scheme, counter)?;
            Ok(Payload::Column { vector })
        }
        ColumnMode::VectorPerCell => {
            let vectors = values
                .iter()
                .map(|v| match v {
                    Value::Text(w) => {
                        let padded = codec::map_word(w, &column.mapping)?;
                        cipher::encrypt(&padded, key, column.scheme, counter.as_deref_mut())
                    }
                    other => Err(Error::Mapping(format!("expected a word, got {other}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Payload::Cells { vectors })
        }
    }
}

/// Decrypts one column back to typed cells.
pub fn decrypt_column(column: &EncryptedColumn, key: &KeyRecord, rows: usize) -> Result<Vec<Value>> {
    let spec = &column.schema.mapping;
    let values = match &column.payload {
        Payload::Column { vector } => {
            let x = cipher::decrypt(vector, key, None)?;
            codec::unmap(x.values(), spec, x.payload_len())?
        }
        Payload::Cells { vectors } => {
            let mut out = Vec::with_capacity(vectors.len());
            for v in vectors {
                let x = cipher::decrypt(v, key, None)?;
                out.extend(codec::unmap(x.values(), spec, x.payload_len())?);
            }
            out
        }
    };
    if values.len() != rows {
        return Err(Error::RowCount { expected: rows, got: values.len() });
    }
    Ok(values)
}

/// Encrypts every column of `log` with the key named in its schema.
pub fn encrypt_log(log: &EventLog, keys: &KeyRing, creator: &str, mut counter: Option<&mut OpCounter>) -> Result<EncryptedLog> {
    let columns = log
        .schema()
        .columns
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let key = keys.require(&col.key_id)?;
            let cells: Vec<&Value> = log.rows().iter().map(|r| &r[i]).collect();
            let payload = encrypt_column(col, &cells, key, counter.as_deref_mut())?;
            Ok(EncryptedColumn { schema: col.clone(), added_by: creator.to_owned(), payload })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncryptedLog { format: FORMAT.to_owned(), rows: log.len(), columns })
}

/// Decrypts every column; fails on the first key missing from `keys`.
pub fn decrypt_log(enc: &EncryptedLog, keys: &KeyRing) -> Result<EventLog> {
    let decoded = enc
        .columns
        .iter()
        .map(|c| decrypt_column(c, keys.require(&c.schema.key_id)?, enc.rows))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..enc.rows).map(|r| decoded.iter().map(|col| col[r].clone()).collect()).collect();
    EventLog::new(enc.schema(), rows)
}

/// Adds a column encrypted by `org` under a key it owns. Existing columns are left untouched.
pub fn append_column(
    enc: &EncryptedLog,
    org: &str,
    column: ColumnSchema,
    raw_values: &[String],
    keys: &KeyRing,
    counter: Option<&mut OpCounter>,
) -> Result<EncryptedLog> {
    column.validate()?;
    if raw_values.len() != enc.rows {
        return Err(Error::RowCount { expected: enc.rows, got: raw_values.len() });
    }
    if enc.column(&column.name).is_some() {
        return Err(Error::Schema(format!("column {:?} already exists", column.name)));
    }
    let key = keys.require(&column.key_id)?;
    if key.owner() != org {
        return Err(Error::NotOwner { org: org.to_owned(), key_id: column.key_id.clone() });
    }
    let cells = raw_values
        .iter()
        .enumerate()
        .map(|(row, raw)| parse_cell(&column, raw).map_err(|e| Error::Cell { row, column: column.name.clone(), msg: e.to_string() }))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Value> = cells.iter().collect();
    let payload = encrypt_column(&column, &refs, key, counter)?;
    let mut out = enc.clone();
    out.columns.push(EncryptedColumn { schema: column, added_by: org.to_owned(), payload });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "access", rename_all = "kebab-case")]
pub enum ViewAccess {
    Plaintext { values: Vec<String> },
    Ciphertext { payload: Payload },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewColumn {
    pub name: String,
    pub key_id: String,
    #[serde(flatten)]
    pub access: ViewAccess,
}

impl ViewColumn {
    pub fn plaintext(&self) -> Option<&[String]> {
        match &self.access {
            ViewAccess::Plaintext { values } => Some(values),
            ViewAccess::Ciphertext { .. } => None,
        }
    }
}

/// What one organization sees: plaintext where it holds the key, ciphertext elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrgView {
    pub org: String,
    pub rows: usize,
    pub columns: Vec<ViewColumn>,
}

impl OrgView {
    pub fn column(&self, name: &str) -> Option<&ViewColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn decrypted_columns(&self) -> Vec<&str> {
        self.columns.iter().filter(|c| c.plaintext().is_some()).map(|c| c.name.as_str()).collect()
    }

    /// Table rendering with `*` standing for ciphertext cells.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in 0..self.rows {
            w.write_record(self.columns.iter().map(|c| c.plaintext().map_or("*", |v| v[r].as_str())))?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
    }
}

/// Builds `org`'s view using only the keys in `keys` that `org` may access.
pub fn org_view(enc: &EncryptedLog, org: &str, keys: &KeyRing) -> Result<OrgView> {
    let columns = enc
        .columns
        .iter()
        .map(|c| {
            let key_id = c.schema.key_id.clone();
            let access = match keys.get(&key_id).filter(|k| k.accessible_by(org)) {
                Some(key) => {
                    let values = decrypt_column(c, key, enc.rows)?.iter().map(|v| render_cell(&c.schema, v)).collect();
                    ViewAccess::Plaintext { values }
                }
                None => ViewAccess::Ciphertext { payload: c.payload.clone() },
            };
            Ok(ViewColumn { name: c.schema.name.clone(), key_id, access })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrgView { org: org.to_owned(), rows: enc.rows, columns })
}
