use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use htelog::cipher::KeyRecord;
use htelog::opcount::{self, Convention, SchemeTag};
use htelog::paillier::{self, KeygenMode, PaillierCiphertext, PaillierKeypair};
use htelog::pipeline::{self, EncryptedLog, KeyRing, Schema};
use htelog::transforms::{self, MatrixKind};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::args::*;

/// Case-id and heart-rate columns of the bundled healthcare example.
const EXAMPLE_COLUMNS: [(&str, [u64; 8]); 2] =
    [("case_id", [1, 2, 1, 2, 1, 1, 2, 2]), ("heart_rate", [72, 78, 60, 75, 58, 60, 90, 93])];

#[derive(Debug)]
pub enum CliError {
    Core(htelog::Error),
    Io(PathBuf, io::Error),
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => 2,
            CliError::Io(..) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Invalid(m) => f.write_str(m),
        }
    }
}

impl From<htelog::Error> for CliError {
    fn from(e: htelog::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub seed: Option<u64>,
    pub verbose: u8,
}

impl Context {
    fn rng(&self) -> ChaCha20Rng {
        let seed = self.seed.unwrap_or_else(rand::random);
        self.note(format_args!("seed {seed}"));
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn note(&self, msg: fmt::Arguments<'_>) {
        if self.verbose > 0 {
            eprintln!("htelog: {msg}");
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))
}

/// Writes to `out`, or standard output when absent. A trailing newline is added if missing.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let mut text = text.to_owned();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.to_owned(), e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn big(name: &str, s: &str) -> Result<BigUint> {
    paillier::parse_decimal(s).map_err(|e| CliError::Invalid(format!("--{name}: {e}")))
}

pub fn run(ctx: &Context, command: Command) -> Result<()> {
    match command {
        Command::Keygen(a) => keygen(ctx, a),
        Command::Matrix(a) => matrix(a),
        Command::Encrypt(a) => encrypt(ctx, a),
        Command::Decrypt(a) => decrypt(a),
        Command::View(a) => view(a),
        Command::Simulate(a) => simulate(ctx, a),
        Command::Paillier { command } => paillier_cmd(ctx, command),
        Command::Bench(a) => bench(ctx, a),
    }
}

fn keygen(ctx: &Context, a: KeygenArgs) -> Result<()> {
    let expr = match a.value {
        Some(v) => v,
        None => pipeline::random_key_expr(&mut ctx.rng()),
    };
    let record = KeyRecord::new(&a.id, &a.owner, &expr)?.with_grants(a.grants);
    match a.keys {
        Some(path) => {
            let mut ring = if path.exists() { KeyRing::from_json(&read(&path)?)? } else { KeyRing::default() };
            ring.insert(record)?;
            emit(Some(&path), &ring.to_json()?)?;
            ctx.note(format_args!("{} now holds {} keys", path.display(), ring.len()));
            Ok(())
        }
        None => emit(None, &serde_json::to_string_pretty(&record)?),
    }
}

fn matrix(a: MatrixArgs) -> Result<()> {
    let kind = match a.kind {
        KindArg::Haar => MatrixKind::HaarNormalized,
        KindArg::HaarRaw => MatrixKind::HaarUnnormalized,
        KindArg::Wh => MatrixKind::WalshHadamard,
    };
    let m = transforms::build(kind, a.l)?;
    let text = match a.format {
        MatrixFormat::Csv => m.to_csv(),
        MatrixFormat::Text => m.to_text(),
    };
    emit(a.out.as_deref(), &text)
}

fn encrypt(ctx: &Context, a: EncryptArgs) -> Result<()> {
    let schema = Schema::from_json(&read(&a.schema)?)?;
    let log = pipeline::EventLog::from_csv(read(&a.log)?.as_bytes(), &schema)?;
    let keys = KeyRing::from_json(&read(&a.keys)?)?;
    let enc = pipeline::encrypt_log(&log, &keys, &a.org, None)?;
    ctx.note(format_args!("encrypted {} rows, {} columns", enc.rows, enc.columns.len()));
    emit(a.out.as_deref(), &enc.to_json()?)
}

fn decrypt(a: DecryptArgs) -> Result<()> {
    let enc = EncryptedLog::from_json(&read(&a.input)?)?;
    let mut keys = KeyRing::from_json(&read(&a.keys)?)?;
    if let Some(org) = &a.org {
        keys = keys.subset_for(org);
    }
    let log = pipeline::decrypt_log(&enc, &keys)?;
    emit(a.out.as_deref(), &log.to_csv_string()?)
}

fn view(a: ViewArgs) -> Result<()> {
    let enc = EncryptedLog::from_json(&read(&a.input)?)?;
    let keys = KeyRing::from_json(&read(&a.keys)?)?;
    let v = pipeline::org_view(&enc, &a.org, &keys)?;
    let text = match a.format {
        ViewFormat::Csv => v.to_csv_string()?,
        ViewFormat::Json => serde_json::to_string_pretty(&v)?,
    };
    emit(a.out.as_deref(), &text)
}

fn simulate(ctx: &Context, a: SimulateArgs) -> Result<()> {
    let transcript = pipeline::run_scenario_file(&a.scenario, ctx.seed).map_err(|e| match e {
        htelog::Error::Io(io) => CliError::Io(a.scenario.clone(), io),
        other => CliError::Core(other),
    })?;
    ctx.note(format_args!("{} steps, seed {}", transcript.steps.len(), transcript.seed));
    emit(a.out.as_deref(), &transcript.to_json()?)
}

fn load_keypair(path: &Path) -> Result<PaillierKeypair> {
    Ok(PaillierKeypair::from_json(&read(path)?)?)
}

fn paillier_cmd(ctx: &Context, command: PaillierCommand) -> Result<()> {
    match command {
        PaillierCommand::Keygen(a) => {
            let mode = match (a.j, a.k, a.g, a.bits) {
                (Some(j), Some(k), Some(g), None) => KeygenMode::Explicit { j: big("j", &j)?, k: big("k", &k)?, g: big("g", &g)? },
                (None, None, None, Some(bits)) => KeygenMode::Random { bits },
                (None, None, Some(g), Some(bits)) => KeygenMode::RandomFixedG { bits, g: big("g", &g)? },
                _ => return Err(CliError::Invalid("give --j --k --g, or --bits [--g]".into())),
            };
            let kp = paillier::keygen(&mode, &mut ctx.rng())?;
            emit(a.out.as_deref(), &serde_json::to_string_pretty(&kp)?)
        }
        PaillierCommand::Encrypt(a) => {
            let kp = load_keypair(&a.key)?;
            let x = big("x", &a.x)?;
            let c = match a.r {
                Some(r) => paillier::encrypt_with_nonce(&x, &kp, &big("r", &r)?, None)?,
                None => paillier::encrypt(&x, &kp, &mut ctx.rng(), None)?,
            };
            emit(None, &serde_json::to_string_pretty(&c)?)
        }
        PaillierCommand::Decrypt(a) => {
            let kp = load_keypair(&a.key)?;
            let c = PaillierCiphertext { value: big("c", &a.c)?, n: kp.n().clone(), r_used: None };
            emit(None, &paillier::decrypt(&c, &kp)?.to_str_radix(10))
        }
        PaillierCommand::Add(a) => {
            let kp = load_keypair(&a.key)?;
            let wrap = |name, s: &str| -> Result<PaillierCiphertext> {
                Ok(PaillierCiphertext { value: big(name, s)?, n: kp.n().clone(), r_used: None })
            };
            let sum = paillier::homomorphic_add(&wrap("c1", &a.c1)?, &wrap("c2", &a.c2)?, &kp)?;
            emit(None, &serde_json::to_string_pretty(&sum)?)
        }
    }
}

fn bench(ctx: &Context, a: BenchArgs) -> Result<()> {
    let schemes = match a.scheme {
        BenchScheme::Hte => vec![SchemeTag::Hte],
        BenchScheme::Whe => vec![SchemeTag::Whe],
        BenchScheme::Phe => vec![SchemeTag::Phe],
        BenchScheme::All => vec![SchemeTag::Hte, SchemeTag::Whe, SchemeTag::Phe],
    };
    let convention = match a.convention {
        ConventionArg::Nominal => Convention::Nominal,
        ConventionArg::Implementation => Convention::Implementation,
    };
    let g = big("g", &a.g)?;
    let rows = opcount::sweep(&schemes, a.l_min, a.l_max, &g, convention)?;
    let mut buf = Vec::new();
    opcount::write_bench_csv(&rows, a.timing, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv output is utf-8"))?;
    ctx.note(format_args!("{} sweep rows", rows.len()));

    if let Some(path) = a.example {
        let mut out = String::from("column,scheme,N,mul,add\n");
        for (name, x) in EXAMPLE_COLUMNS {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let h = opcount::count_hte(&xf)?;
            let w = opcount::count_whe(&xf)?;
            let p = opcount::count_phe_with(&x, &g, convention)?;
            out.push_str(&format!("{name},hte,8,{},{}\n", h.mul, h.add));
            out.push_str(&format!("{name},whe,8,{},{}\n", w.mul, w.add));
            out.push_str(&format!("{name},phe,8,{},{}\n", p.mul, p.add));
        }
        emit(Some(&path), &out)?;
    }
    Ok(())
}
