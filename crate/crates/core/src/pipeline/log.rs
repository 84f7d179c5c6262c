use std::io::{Read, Write};
use std::path::Path;

use crate::codec::{self, MappingMode, Value};
use crate::pipeline::{ColumnSchema, Schema};
use crate::{Error, Result};

/// Parses one raw cell according to its column mapping.
///
/// Letters are normalized: activity symbols to uppercase, words to lowercase.
pub fn parse_cell(column: &ColumnSchema, raw: &str) -> Result<Value> {
    let raw = raw.trim();
    let spec = &column.mapping;
    match spec.mode {
        MappingMode::Numeric => raw
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| Error::Mapping(format!("expected an integer, got {raw:?}"))),
        MappingMode::Timestamp => {
            let ts = spec.parse_timestamp(raw)?;
            codec::map_timestamp(&ts, spec)?;
            Ok(Value::Time(ts))
        }
        MappingMode::AlphaSymbol => {
            codec::map_activity_symbol(raw)?;
            Ok(Value::Text(raw.to_ascii_uppercase()))
        }
        MappingMode::AlphaWord => {
            codec::map_word(raw, spec)?;
            Ok(Value::Text(raw.to_ascii_lowercase()))
        }
    }
}

/// Renders a cell back to its CSV text.
pub fn render_cell(column: &ColumnSchema, value: &Value) -> String {
    match value {
        Value::Time(t) => column.mapping.format_timestamp(t),
        other => other.to_string(),
    }
}

/// A typed event log: ordered columns and one record per event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    schema: Schema,
    rows: Vec<Vec<Value>>,
}

impl EventLog {
    /// Builds a log from already-typed rows, checking them against the schema.
    pub fn new(schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self> {
        schema.validate()?;
        let log = EventLog { schema, rows };
        log.check()?;
        Ok(log)
    }

    fn check(&self) -> Result<()> {
        let width = self.schema.columns.len();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Cell { row: r, column: String::new(), msg: format!("expected {width} cells, got {}", row.len()) });
            }
            for (col, v) in self.schema.columns.iter().zip(row) {
                let ok = matches!(
                    (col.mapping.mode, v),
                    (MappingMode::Numeric, Value::Int(_))
                        | (MappingMode::Timestamp, Value::Time(_))
                        | (MappingMode::AlphaSymbol | MappingMode::AlphaWord, Value::Text(_))
                );
                if !ok {
                    return Err(Error::Cell { row: r, column: col.name.clone(), msg: format!("value {v} does not fit the mapping") });
                }
            }
        }
        if self.schema.ascending_time {
            for (c, col) in self.schema.columns.iter().enumerate() {
                if col.mapping.mode != MappingMode::Timestamp {
                    continue;
                }
                if let Some(r) = (1..self.rows.len()).find(|&r| self.rows[r][c] < self.rows[r - 1][c]) {
                    return Err(Error::Cell { row: r, column: col.name.clone(), msg: "timestamps are not ascending".into() });
                }
            }
        }
        Ok(())
    }

    /// Reads a CSV log whose header names every schema column (extra columns are ignored).
    pub fn from_csv<R: Read>(reader: R, schema: &Schema) -> Result<Self> {
        schema.validate()?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::Schema("log has no header row".into()));
        }
        let positions = schema
            .columns
            .iter()
            .map(|c| headers.iter().position(|h| h.trim() == c.name).ok_or_else(|| Error::MissingColumn(c.name.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = schema
                .columns
                .iter()
                .zip(&positions)
                .map(|(col, &p)| {
                    let raw = record.get(p).unwrap_or("");
                    parse_cell(col, raw).map_err(|e| Error::Cell { row: r, column: col.name.clone(), msg: e.to_string() })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Schema("log has no events".into()));
        }
        EventLog::new(schema.clone(), rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.schema.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(self.schema.columns.iter().zip(row).map(|(c, v)| render_cell(c, v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Appends a typed column.
    pub fn push_column(&mut self, column: ColumnSchema, values: Vec<Value>) -> Result<()> {
        if values.len() != self.rows.len() {
            return Err(Error::RowCount { expected: self.rows.len(), got: values.len() });
        }
        let mut schema = self.schema.clone();
        schema.columns.push(column);
        schema.validate()?;
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.push(v);
        }
        self.schema = schema;
        self.check()
    }
}

pub fn load_log(path: impl AsRef<Path>, schema: &Schema) -> Result<EventLog> {
    let file = std::fs::File::open(path)?;
    EventLog::from_csv(file, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::Scheme;
    use crate::codec::{MappingSpec, TimeUnit};
    use crate::pipeline::ColumnMode;
    use chrono::NaiveDate;

    fn schema() -> Schema {
        let origin = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let mut s = Schema::new(vec![
            ColumnSchema::new("case", MappingSpec::numeric(), ColumnMode::VectorPerColumn, "zs", Scheme::Hte),
            ColumnSchema::new(
                "ts",
                MappingSpec::timestamp(origin, TimeUnit::Minutes).with_time_format("%H:%M"),
                ColumnMode::VectorPerColumn,
                "zs",
                Scheme::Hte,
            ),
            ColumnSchema::new("act", MappingSpec::alpha_symbol(), ColumnMode::VectorPerColumn, "zs", Scheme::Hte),
            ColumnSchema::new("who", MappingSpec::alpha_word(), ColumnMode::VectorPerCell, "z1", Scheme::Hte),
        ]);
        s.ascending_time = true;
        s
    }

    #[test]
    fn parse_and_render() {
        let csv = "case,ts,act,who,extra\n1,10:20,a,Tom,x\n2,11:31,B,\"John\",y\n";
        let log = EventLog::from_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.column("act").unwrap(), vec![&Value::Text("A".into()), &Value::Text("B".into())]);
        assert_eq!(log.to_csv_string().unwrap(), "case,ts,act,who\n1,10:20,A,tom\n2,11:31,B,john\n");
    }

    #[test]
    fn rejects_bad_logs() {
        let s = schema();
        assert!(EventLog::from_csv("".as_bytes(), &s).is_err());
        assert!(EventLog::from_csv("case,ts,act,who\n".as_bytes(), &s).is_err());
        assert!(matches!(EventLog::from_csv("case,ts,act\n1,10:20,A\n".as_bytes(), &s), Err(Error::MissingColumn(c)) if c == "who"));
        let bad_ts = "case,ts,act,who\n1,25:99,A,tom\n";
        assert!(matches!(EventLog::from_csv(bad_ts.as_bytes(), &s), Err(Error::Cell { row: 0, .. })));
        let bad_word = "case,ts,act,who\n1,10:20,A,t0m\n";
        assert!(EventLog::from_csv(bad_word.as_bytes(), &s).is_err());
        let descending = "case,ts,act,who\n1,10:20,A,tom\n1,09:00,A,tom\n";
        assert!(matches!(EventLog::from_csv(descending.as_bytes(), &s), Err(Error::Cell { row: 1, .. })));
        let float_case = "case,ts,act,who\n1.5,10:20,A,tom\n";
        assert!(EventLog::from_csv(float_case.as_bytes(), &s).is_err());
    }

    #[test]
    fn push_column_checks_length() {
        let csv = "case,ts,act,who\n1,10:20,A,tom\n";
        let mut log = EventLog::from_csv(csv.as_bytes(), &schema()).unwrap();
        let hr = ColumnSchema::new("hr", MappingSpec::numeric(), ColumnMode::VectorPerColumn, "z2", Scheme::Hte);
        assert!(matches!(log.push_column(hr.clone(), vec![]), Err(Error::RowCount { expected: 1, got: 0 })));
        log.push_column(hr, vec![Value::Int(72)]).unwrap();
        assert_eq!(log.schema().columns.len(), 5);
    }
}
