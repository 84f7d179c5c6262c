//! Lightweight anonymization of process-mining event logs.
//!
//! Columns of an event log are mapped to real vectors, zero padded to a
//! power-of-two length and multiplied by a scaled Haar matrix under a
//! real-valued private key (HTE). The same construction over a
//! Walsh-Hadamard matrix (WHE) and a textbook Paillier cryptosystem (PHE)
//! are provided as baselines, together with operation counters that
//! reproduce the cost model used to compare the three.
//!
//! Module map:
//!
//! * [`transforms`]: Haar / Walsh-Hadamard matrices, application, structure checks.
//! * [`codec`]: timestamp, letter and word mapping, zero padding.
//! * [`cipher`]: HTE/WHE encryption under a scalar key.
//! * [`paillier`]: additive Paillier with explicit and random key generation.
//! * [`opcount`]: multiplication/addition tallies and benchmark sweeps.
//! * [`pipeline`]: event logs, keyrings, organization views and scenarios.

pub mod cipher;
pub mod codec;
mod error;
pub mod opcount;
pub mod paillier;
pub mod pipeline;
pub mod transforms;

pub use error::{Error, Result};
