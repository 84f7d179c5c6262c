use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::cipher::Scheme;
use crate::pipeline::{
    append_column, decrypt_log, encrypt_log, org_view, parse_cell, render_cell, ColumnSchema, EncryptedLog, EventLog,
    KeyRing, OrgView, Organization, Role, Schema, FORMAT,
};
use crate::{Error, Result};

/// A file path, resolved against the scenario's directory, or inline content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(String),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InlineCsv {
    pub csv: String,
}

/// A cell in an append list: JSON numbers and strings are both accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawCell {
    Int(i64),
    Text(String),
}

impl RawCell {
    fn text(&self) -> String {
        match self {
            RawCell::Int(v) => v.to_string(),
            RawCell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendSpec {
    pub column: ColumnSchema,
    pub values: Vec<RawCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub org: String,
    /// Columns the organization tries to read on receipt.
    #[serde(default)]
    pub read: Vec<String>,
    #[serde(default)]
    pub append: Vec<AppendSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub organizations: Vec<Organization>,
    pub log: Source<InlineCsv>,
    pub schema: Source<Schema>,
    pub keys: Source<serde_json::Value>,
    #[serde(default)]
    pub hops: Vec<Hop>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnKey {
    pub name: String,
    pub key_id: String,
    pub scheme: Scheme,
}

/// Key metadata as published in a transcript; the value stays private.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySummary {
    pub id: String,
    pub owner: String,
    pub granted_to: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadOutcome {
    Plaintext,
    CiphertextOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewStage {
    Received,
    AfterAppend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlainTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl PlainTable {
    pub fn from_log(log: &EventLog) -> Self {
        let cols = &log.schema().columns;
        PlainTable {
            columns: cols.iter().map(|c| c.name.clone()).collect(),
            rows: log.rows().iter().map(|r| cols.iter().zip(r).map(|(c, v)| render_cell(c, v)).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Event {
    Create { org: String, rows: usize, columns: Vec<String> },
    Encrypt { org: String, columns: Vec<ColumnKey> },
    Relay { interface: String, from: String, to: String, observed: EncryptedLog },
    View { stage: ViewStage, view: OrgView },
    Read { org: String, column: String, outcome: ReadOutcome },
    Append { org: String, column: ColumnKey },
    Decrypt { org: String, log: PlainTable, matches_expected: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub step: usize,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub format: String,
    pub scenario: String,
    pub seed: u64,
    pub organizations: Vec<Organization>,
    pub keys: Vec<KeySummary>,
    pub steps: Vec<Step>,
    pub final_log: EncryptedLog,
    /// Every organization's view of the final log, in declaration order.
    pub final_views: Vec<OrgView>,
}

impl Transcript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn final_view(&self, org: &str) -> Option<&OrgView> {
        self.final_views.iter().find(|v| v.org == org)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.steps.iter().map(|s| &s.event)
    }
}

/// Everything a scenario needs, with its sources read.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub name: String,
    pub seed: u64,
    pub organizations: Vec<Organization>,
    pub log: EventLog,
    pub keys: KeyRing,
    pub hops: Vec<Hop>,
}

fn read_source(base: &Path, path: &str) -> Result<String> {
    let p = PathBuf::from(path);
    Ok(std::fs::read_to_string(if p.is_absolute() { p } else { base.join(p) })?)
}

impl Scenario {
    /// Reads referenced files relative to `base` and draws `"random"` keys from `seed`.
    pub fn resolve(&self, base: &Path, seed: Option<u64>) -> Result<ResolvedScenario> {
        let seed = seed.unwrap_or(self.seed);
        let schema = match &self.schema {
            Source::Path(p) => Schema::from_json(&read_source(base, p)?)?,
            Source::Inline(s) => {
                s.validate()?;
                s.clone()
            }
        };
        let log = match &self.log {
            Source::Path(p) => EventLog::from_csv(read_source(base, p)?.as_bytes(), &schema)?,
            Source::Inline(c) => EventLog::from_csv(c.csv.as_bytes(), &schema)?,
        };
        let keys_doc = match &self.keys {
            Source::Path(p) => serde_json::from_str(&read_source(base, p)?)?,
            Source::Inline(v) => v.clone(),
        };
        let keys = KeyRing::from_value_resolving(keys_doc, &mut ChaCha20Rng::seed_from_u64(seed))?;
        Ok(ResolvedScenario {
            name: self.name.clone(),
            seed,
            organizations: self.organizations.clone(),
            log,
            keys,
            hops: self.hops.clone(),
        })
    }
}

/// Runs a scenario file; paths inside it are relative to its directory.
pub fn run_scenario_file(path: impl AsRef<Path>, seed: Option<u64>) -> Result<Transcript> {
    let path = path.as_ref();
    let scenario = Scenario::from_json(&std::fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    run_scenario(&scenario.resolve(base, seed)?)
}

fn single(orgs: &[Organization], role: Role) -> Result<&Organization> {
    let mut it = orgs.iter().filter(|o| o.role == role);
    match (it.next(), it.next()) {
        (Some(o), None) => Ok(o),
        _ => Err(Error::Scenario(format!("expected exactly one {role:?} organization"))),
    }
}

fn column_key(c: &ColumnSchema) -> ColumnKey {
    ColumnKey { name: c.name.clone(), key_id: c.key_id.clone(), scheme: c.scheme }
}

/// Relays the log from the creator through each hop to the PM point.
pub fn run_scenario(sc: &ResolvedScenario) -> Result<Transcript> {
    let creator = single(&sc.organizations, Role::Creator)?.id.clone();
    let pm = single(&sc.organizations, Role::PmPoint)?.id.clone();
    for hop in &sc.hops {
        match sc.organizations.iter().find(|o| o.id == hop.org) {
            Some(o) if o.role == Role::Intermediate => {}
            Some(_) => return Err(Error::Scenario(format!("hop {:?} is not an intermediate organization", hop.org))),
            None => return Err(Error::Scenario(format!("unknown organization {:?}", hop.org))),
        }
    }
    for col in &sc.log.schema().columns {
        if !sc.keys.can_access(&creator, &col.key_id) {
            return Err(Error::Scenario(format!("creator {creator:?} cannot use key {:?}", col.key_id)));
        }
    }

    let mut steps = Vec::new();
    let mut push = |event: Event| steps.push(Step { step: steps.len() + 1, event });

    push(Event::Create {
        org: creator.clone(),
        rows: sc.log.len(),
        columns: sc.log.schema().columns.iter().map(|c| c.name.clone()).collect(),
    });
    let mut enc = encrypt_log(&sc.log, &sc.keys, &creator, None)?;
    push(Event::Encrypt { org: creator.clone(), columns: sc.log.schema().columns.iter().map(column_key).collect() });

    let mut expected = sc.log.clone();
    let mut sender = creator.clone();
    for (m, hop) in sc.hops.iter().enumerate() {
        push(Event::Relay { interface: format!("I{}", m + 1), from: sender.clone(), to: hop.org.clone(), observed: enc.clone() });
        let view = org_view(&enc, &hop.org, &sc.keys)?;
        for name in &hop.read {
            let col = view.column(name).ok_or_else(|| Error::Scenario(format!("{:?} reads unknown column {name:?}", hop.org)))?;
            let outcome = if col.plaintext().is_some() { ReadOutcome::Plaintext } else { ReadOutcome::CiphertextOnly };
            push(Event::Read { org: hop.org.clone(), column: name.clone(), outcome });
        }
        push(Event::View { stage: ViewStage::Received, view });
        for add in &hop.append {
            let raw: Vec<String> = add.values.iter().map(RawCell::text).collect();
            enc = append_column(&enc, &hop.org, add.column.clone(), &raw, &sc.keys, None)?;
            let typed = raw.iter().map(|r| parse_cell(&add.column, r)).collect::<Result<Vec<_>>>()?;
            expected.push_column(add.column.clone(), typed)?;
            push(Event::Append { org: hop.org.clone(), column: column_key(&add.column) });
        }
        if !hop.append.is_empty() {
            push(Event::View { stage: ViewStage::AfterAppend, view: org_view(&enc, &hop.org, &sc.keys)? });
        }
        sender = hop.org.clone();
    }
    push(Event::Relay {
        interface: format!("I{}", sc.hops.len() + 1),
        from: sender,
        to: pm.clone(),
        observed: enc.clone(),
    });

    let pm_keys = sc.keys.subset_for(&pm);
    if let Some(c) = enc.columns.iter().find(|c| pm_keys.get(&c.schema.key_id).is_none()) {
        return Err(Error::Scenario(format!("pm-point {pm:?} lacks key {:?} for column {:?}", c.schema.key_id, c.schema.name)));
    }
    let decrypted = decrypt_log(&enc, &pm_keys)?;
    let matches_expected =
        decrypted.rows() == expected.rows() && decrypted.schema().columns == expected.schema().columns;
    push(Event::Decrypt { org: pm.clone(), log: PlainTable::from_log(&decrypted), matches_expected });
    if !matches_expected {
        return Err(Error::Scenario("pm-point decryption differs from the relayed plaintext".into()));
    }

    let final_views =
        sc.organizations.iter().map(|o| org_view(&enc, &o.id, &sc.keys)).collect::<Result<Vec<_>>>()?;
    let keys = sc
        .keys
        .keys()
        .iter()
        .map(|k| KeySummary {
            id: k.key_id().to_owned(),
            owner: k.owner().to_owned(),
            granted_to: k.granted_to().iter().cloned().collect(),
        })
        .collect();
    Ok(Transcript {
        format: FORMAT.to_owned(),
        scenario: sc.name.clone(),
        seed: sc.seed,
        organizations: sc.organizations.clone(),
        keys,
        steps,
        final_log: enc,
        final_views,
    })
}
