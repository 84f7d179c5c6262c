//! Column-wise encryption of event logs and their relay between organizations.

mod encrypted;
mod keyring;
mod log;
mod scenario;
mod schema;

pub use encrypted::{
    append_column, decrypt_column, decrypt_log, encrypt_column, encrypt_log, org_view, EncryptedColumn, EncryptedLog,
    OrgView, Payload, ViewAccess, ViewColumn, FORMAT,
};
pub use keyring::{random_key_expr, KeyRing, Organization, Role, RANDOM_KEY, RANDOM_KEY_RANGE};
pub use log::{load_log, parse_cell, render_cell, EventLog};
pub use scenario::{
    run_scenario, run_scenario_file, AppendSpec, ColumnKey, Event, Hop, InlineCsv, KeySummary, PlainTable, RawCell,
    ReadOutcome, ResolvedScenario, Scenario, Source, Step, Transcript, ViewStage,
};
pub use schema::{ColumnMode, ColumnSchema, Schema};
