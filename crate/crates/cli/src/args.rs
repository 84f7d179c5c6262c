use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "htelog", version, about = "Encrypt process-mining event logs with Haar-transform keys")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Seed for every random choice (keys, Paillier nonces, primes).
    #[arg(long, global = true, env = "HTELOG_SEED")]
    pub seed: Option<u64>,

    /// Print progress to standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a scalar key record, optionally adding it to a key file.
    Keygen(KeygenArgs),
    /// Print a transform matrix.
    Matrix(MatrixArgs),
    /// Encrypt a CSV event log column by column.
    Encrypt(EncryptArgs),
    /// Decrypt an encrypted log back to CSV.
    Decrypt(DecryptArgs),
    /// Show what one organization can read.
    View(ViewArgs),
    /// Run a multi-organization relay scenario and write its transcript.
    Simulate(SimulateArgs),
    /// Paillier key generation, encryption, decryption and addition.
    Paillier {
        #[command(subcommand)]
        command: PaillierCommand,
    },
    /// Operation-count sweep for HTE, WHE and PHE.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub owner: String,
    /// Key expression such as `2`, `sqrt(8)` or `3*sqrt(8)`; drawn uniformly from [1, 1000) when absent.
    #[arg(long)]
    pub value: Option<String>,
    /// Organization allowed to use the key (repeatable).
    #[arg(long = "grant")]
    pub grants: Vec<String>,
    /// Key file to add the record to (created when missing).
    #[arg(long)]
    pub keys: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Haar,
    HaarRaw,
    Wh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long, value_enum, default_value = "haar")]
    pub kind: KindArg,
    /// Level; the matrix has 2^l rows.
    #[arg(long)]
    pub l: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: MatrixFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub keys: PathBuf,
    /// Organization recorded as the encrypting party.
    #[arg(long, default_value = "org1")]
    pub org: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    /// Encrypted log JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub keys: PathBuf,
    /// Decrypt with only the keys this organization may use.
    #[arg(long)]
    pub org: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ViewArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub keys: PathBuf,
    #[arg(long)]
    pub org: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ViewFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PaillierCommand {
    /// Explicit primes with --j --k --g, or random primes with --bits.
    Keygen(PaillierKeygenArgs),
    Encrypt(PaillierEncryptArgs),
    Decrypt(PaillierDecryptArgs),
    /// Multiply two ciphertexts, which adds their plaintexts.
    Add(PaillierAddArgs),
}

#[derive(Debug, Args)]
pub struct PaillierKeygenArgs {
    #[arg(long, requires_all = ["k", "g"], conflicts_with = "bits")]
    pub j: Option<String>,
    #[arg(long, requires = "j")]
    pub k: Option<String>,
    /// Generator; random when --bits is given without it.
    #[arg(long)]
    pub g: Option<String>,
    /// Bits per prime.
    #[arg(long)]
    pub bits: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PaillierEncryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub x: String,
    /// Nonce; random when absent.
    #[arg(long)]
    pub r: Option<String>,
}

#[derive(Debug, Args)]
pub struct PaillierDecryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Ciphertext value.
    #[arg(long)]
    pub c: String,
}

#[derive(Debug, Args)]
pub struct PaillierAddArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub c1: String,
    #[arg(long)]
    pub c2: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchScheme {
    Hte,
    Whe,
    Phe,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Nominal,
    Implementation,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub scheme: BenchScheme,
    #[arg(long, default_value_t = 2)]
    pub l_min: u32,
    #[arg(long, default_value_t = 8)]
    pub l_max: u32,
    /// Paillier generator used for PHE rows.
    #[arg(long, default_value = "22")]
    pub g: String,
    #[arg(long, value_enum, default_value = "nominal")]
    pub convention: ConventionArg,
    /// Add a wall-clock column (machine dependent, so off by default).
    #[arg(long)]
    pub timing: bool,
    /// Also write per-column counts for the example case-id and heart-rate vectors.
    #[arg(long)]
    pub example: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
