use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix level l={0} out of range 1..={max}", max = crate::transforms::MAX_LEVEL)]
    LevelOutOfRange(u32),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("block {block} is smaller than the payload length {len}")]
    BlockTooSmall { block: usize, len: usize },
    #[error("rows are not a permutation of a canonical {0} matrix")]
    NotAPermutation(String),

    #[error("invalid mapping: {0}")]
    Mapping(String),
    #[error("timestamp {ts} lies before the time origin {origin}")]
    BeforeOrigin { ts: String, origin: String },
    #[error("character {0:?} cannot be mapped in the active alphabet")]
    NonAlphabetic(char),
    #[error("integrity check failed at index {index}: {value} is not within tolerance of an integer")]
    Integrity { index: usize, value: f64 },
    #[error("decoded value {0} has no symbol in the active alphabet")]
    SymbolOutOfRange(i64),

    #[error("key must be nonzero")]
    ZeroKey,
    #[error("cannot parse key expression {0:?}")]
    KeyParse(String),
    #[error("key mismatch: ciphertext is bound to {expected:?}, got {got:?}")]
    KeyMismatch { expected: String, got: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key id {0:?}")]
    DuplicateKey(String),
    #[error("organization {org:?} does not own key {key_id:?}")]
    NotOwner { org: String, key_id: String },

    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("invalid Paillier parameters: {0}")]
    InvalidParameters(String),
    #[error("plaintext must lie in [0, n)")]
    PlaintextOutOfRange,
    #[error("nonce r is not a unit modulo n")]
    InvalidNonce,
    #[error("ciphertext is not a unit modulo n^2")]
    CorruptCiphertext,
    #[error("ciphertexts were produced under different keypairs")]
    KeypairMismatch,
    #[error("operation count {0} is too large to evaluate exactly")]
    CountTooLarge(String),

    #[error("schema error: {0}")]
    Schema(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}, column {column:?}: {msg}")]
    Cell { row: usize, column: String, msg: String },
    #[error("row count mismatch: log has {expected} rows, column has {got}")]
    RowCount { expected: usize, got: usize },
    #[error("scenario failure: {0}")]
    Scenario(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True when the failure came from the filesystem rather than from the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}
