//! Textbook Paillier: `E(x) = g^x · r^n mod n²`,
//! `D(c) = L(c^λ mod n²) · ν mod n` with `L(u) = (u - 1) / n`.
//!
//! Key generation repeats until `ν = L(g^λ mod n²)^-1 mod n` exists.
//! Primes are checked with Miller-Rabin: deterministic bases below `2^64`,
//! 40 rounds above.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::opcount::{exponentiation_cost, OpCounter};
use crate::{Error, Result};

pub const MIN_PRIME_BITS: u64 = 8;
pub const MAX_PRIME_BITS: u64 = 512;
const MR_ROUNDS: usize = 40;
const MAX_KEYGEN_ATTEMPTS: usize = 10_000;

const SMALL_PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.trim().as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("invalid decimal integer"))
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            let s: Option<String> = Option::deserialize(d)?;
            s.map(|s| BigUint::parse_bytes(s.trim().as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("invalid decimal integer")))
                .transpose()
        }
    }
}

/// Parses a decimal big integer.
pub fn parse_decimal(s: &str) -> Result<BigUint> {
    BigUint::parse_bytes(s.trim().as_bytes(), 10).ok_or_else(|| Error::InvalidParameters(format!("not a decimal integer: {s:?}")))
}

fn miller_rabin_round(n: &BigUint, n_minus_1: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || x == *n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = x.modpow(&BigUint::from(2u32), n);
        if x == *n_minus_1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin; deterministic for `n < 2^64`, otherwise 40 rounds with
/// bases drawn from a generator seeded by `n` itself (so the verdict is reproducible).
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    if n.bits() <= 64 {
        return SMALL_PRIMES.iter().all(|&a| miller_rabin_round(n, &n_minus_1, &d, s, &BigUint::from(a)));
    }
    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst = src;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let two = BigUint::from(2u32);
    (0..MR_ROUNDS).all(|_| {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        miller_rabin_round(n, &n_minus_1, &d, s, &a)
    })
}

/// Uniform random prime with exactly `bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(0, true);
        if is_prime(&c) {
            return c;
        }
    }
}

fn l_function(u: &BigUint, n: &BigUint) -> BigUint {
    (u - 1u32) / n
}

/// Public `(n, g)` and private `(λ, ν)` key material plus the primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierKeypair {
    #[serde(with = "decimal")]
    j: BigUint,
    #[serde(with = "decimal")]
    k: BigUint,
    #[serde(with = "decimal")]
    n: BigUint,
    #[serde(with = "decimal")]
    g: BigUint,
    #[serde(with = "decimal")]
    lambda: BigUint,
    #[serde(with = "decimal")]
    nu: BigUint,
    #[serde(skip)]
    n_squared: BigUint,
}

impl PaillierKeypair {
    pub fn j(&self) -> &BigUint {
        &self.j
    }
    pub fn k(&self) -> &BigUint {
        &self.k
    }
    pub fn n(&self) -> &BigUint {
        &self.n
    }
    pub fn g(&self) -> &BigUint {
        &self.g
    }
    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }
    pub fn nu(&self) -> &BigUint {
        &self.nu
    }
    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    /// Re-derives every field from `(j, k, g)` and returns the checked keypair.
    pub fn verified(&self) -> Result<Self> {
        let fresh = keygen_explicit(&self.j, &self.k, &self.g)?;
        if fresh.n != self.n || fresh.lambda != self.lambda || fresh.nu != self.nu {
            return Err(Error::InvalidParameters("keypair fields are inconsistent".into()));
        }
        Ok(fresh)
    }

    /// Parses and verifies a keypair (the JSON form omits the cached `n²`).
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<PaillierKeypair>(s)?.verified()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeygenMode {
    /// Fixed primes and generator; fully deterministic.
    Explicit { j: BigUint, k: BigUint, g: BigUint },
    /// Random `bits`-bit primes and a random generator.
    Random { bits: u64 },
    /// Random `bits`-bit primes, generator fixed to `g`.
    RandomFixedG { bits: u64, g: BigUint },
}

impl KeygenMode {
    pub fn explicit(j: u64, k: u64, g: u64) -> Self {
        KeygenMode::Explicit { j: j.into(), k: k.into(), g: g.into() }
    }
}

/// Finishes key setup once `j, k, g` are chosen; `None` when `ν` does not exist.
fn derive(j: &BigUint, k: &BigUint, g: &BigUint) -> Option<PaillierKeypair> {
    let n = j * k;
    let n_squared = &n * &n;
    if g.is_zero() || g >= &n_squared || !g.gcd(&n_squared).is_one() {
        return None;
    }
    let j1 = j - 1u32;
    let k1 = k - 1u32;
    let lambda = j1.lcm(&k1);
    let u = g.modpow(&lambda, &n_squared);
    let lu = l_function(&u, &n);
    // ν exists iff gcd(L(g^λ mod n²), n) = 1
    let nu = lu.modinv(&n)?;
    Some(PaillierKeypair { j: j.clone(), k: k.clone(), n, g: g.clone(), lambda, nu, n_squared })
}

fn primes_admissible(j: &BigUint, k: &BigUint) -> bool {
    j != k && (j * k).gcd(&((j - 1u32) * (k - 1u32))).is_one()
}

pub fn keygen_explicit(j: &BigUint, k: &BigUint, g: &BigUint) -> Result<PaillierKeypair> {
    for p in [j, k] {
        if !is_prime(p) {
            return Err(Error::NotPrime(p.to_string()));
        }
    }
    if !primes_admissible(j, k) {
        return Err(Error::InvalidParameters(format!("gcd(jk, (j-1)(k-1)) != 1 for j={j}, k={k}")));
    }
    let n_squared = (j * k) * (j * k);
    if g.is_zero() || g >= &n_squared || !g.gcd(&n_squared).is_one() {
        return Err(Error::InvalidParameters(format!("g={g} is not a unit modulo n^2={n_squared}")));
    }
    derive(j, k, g).ok_or_else(|| Error::InvalidParameters(format!("L(g^lambda mod n^2) is not invertible modulo n for g={g}")))
}

fn check_bits(bits: u64) -> Result<()> {
    if !(MIN_PRIME_BITS..=MAX_PRIME_BITS).contains(&bits) {
        return Err(Error::InvalidParameters(format!("prime size {bits} bits outside {MIN_PRIME_BITS}..={MAX_PRIME_BITS}")));
    }
    Ok(())
}

fn random_prime_pair<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> (BigUint, BigUint) {
    loop {
        let j = random_prime(bits, rng);
        let k = random_prime(bits, rng);
        if primes_admissible(&j, &k) {
            return (j, k);
        }
    }
}

pub fn keygen_random<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<PaillierKeypair> {
    check_bits(bits)?;
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let (j, k) = random_prime_pair(bits, rng);
        let n = &j * &k;
        let g = rng.gen_biguint_range(&BigUint::from(2u32), &(&n * &n));
        if let Some(kp) = derive(&j, &k, &g) {
            return Ok(kp);
        }
    }
    Err(Error::InvalidParameters("key generation did not converge".into()))
}

pub fn keygen_random_with_g<R: Rng + ?Sized>(bits: u64, g: &BigUint, rng: &mut R) -> Result<PaillierKeypair> {
    check_bits(bits)?;
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let (j, k) = random_prime_pair(bits, rng);
        if let Some(kp) = derive(&j, &k, g) {
            return Ok(kp);
        }
    }
    Err(Error::InvalidParameters(format!("no admissible primes found for g={g}")))
}

pub fn keygen<R: Rng + ?Sized>(mode: &KeygenMode, rng: &mut R) -> Result<PaillierKeypair> {
    match mode {
        KeygenMode::Explicit { j, k, g } => keygen_explicit(j, k, g),
        KeygenMode::Random { bits } => keygen_random(*bits, rng),
        KeygenMode::RandomFixedG { bits, g } => keygen_random_with_g(*bits, g, rng),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierCiphertext {
    #[serde(with = "decimal")]
    pub value: BigUint,
    /// Modulus `n` of the keypair the ciphertext belongs to.
    #[serde(with = "decimal")]
    pub n: BigUint,
    /// Nonce, kept only when the caller supplied it.
    #[serde(with = "decimal::opt", default, skip_serializing_if = "Option::is_none")]
    pub r_used: Option<BigUint>,
}

fn record_exponentiation(counter: Option<&mut OpCounter>, g: &BigUint, x: &BigUint) -> Result<()> {
    if let Some(c) = counter {
        let cost = exponentiation_cost(g, x, c.convention())?;
        c.record_mul_big(&cost);
    }
    Ok(())
}

/// `E(x) = g^x · r^n mod n²` with a caller-chosen nonce.
pub fn encrypt_with_nonce(x: &BigUint, kp: &PaillierKeypair, r: &BigUint, counter: Option<&mut OpCounter>) -> Result<PaillierCiphertext> {
    if x >= &kp.n {
        return Err(Error::PlaintextOutOfRange);
    }
    if r.is_zero() || r >= &kp.n || !r.gcd(&kp.n).is_one() {
        return Err(Error::InvalidNonce);
    }
    record_exponentiation(counter, &kp.g, x)?;
    let nn = &kp.n_squared;
    let value = (kp.g.modpow(x, nn) * r.modpow(&kp.n, nn)) % nn;
    Ok(PaillierCiphertext { value, n: kp.n.clone(), r_used: Some(r.clone()) })
}

/// Random unit of `Z_n`.
pub fn random_nonce<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let r = rng.gen_biguint_range(&BigUint::one(), n);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}

/// `E(x)` with a fresh uniform nonce; the nonce is not retained.
pub fn encrypt<R: Rng + ?Sized>(x: &BigUint, kp: &PaillierKeypair, rng: &mut R, counter: Option<&mut OpCounter>) -> Result<PaillierCiphertext> {
    if x >= &kp.n {
        return Err(Error::PlaintextOutOfRange);
    }
    let r = random_nonce(&kp.n, rng);
    let mut c = encrypt_with_nonce(x, kp, &r, counter)?;
    c.r_used = None;
    Ok(c)
}

pub fn decrypt(c: &PaillierCiphertext, kp: &PaillierKeypair) -> Result<BigUint> {
    if c.n != kp.n {
        return Err(Error::KeypairMismatch);
    }
    let nn = &kp.n_squared;
    if c.value.is_zero() || &c.value >= nn || !c.value.gcd(nn).is_one() {
        return Err(Error::CorruptCiphertext);
    }
    let u = c.value.modpow(&kp.lambda, nn);
    Ok((l_function(&u, &kp.n) * &kp.nu) % &kp.n)
}

/// `c1 · c2 mod n²`, which decrypts to `x1 + x2 mod n`.
pub fn homomorphic_add(c1: &PaillierCiphertext, c2: &PaillierCiphertext, kp: &PaillierKeypair) -> Result<PaillierCiphertext> {
    if c1.n != kp.n || c2.n != kp.n {
        return Err(Error::KeypairMismatch);
    }
    Ok(PaillierCiphertext { value: (&c1.value * &c2.value) % &kp.n_squared, n: kp.n.clone(), r_used: None })
}

/// One fresh keypair per element, then one encryption per element.
///
/// Elements end up under different moduli, so ciphertexts of different
/// elements cannot be combined homomorphically.
pub fn encrypt_vector_per_element_keys<R: Rng + ?Sized>(
    x: &[BigUint],
    mode: &KeygenMode,
    rng: &mut R,
    mut counter: Option<&mut OpCounter>,
) -> Result<Vec<(PaillierKeypair, PaillierCiphertext)>> {
    x.iter()
        .map(|xi| {
            let kp = keygen(mode, rng)?;
            let c = encrypt(xi, &kp, rng, counter.as_deref_mut())?;
            Ok((kp, c))
        })
        .collect()
}

/// All elements under one shared keypair, so homomorphic sums are possible.
pub fn encrypt_vector_shared<R: Rng + ?Sized>(
    x: &[BigUint],
    kp: &PaillierKeypair,
    rng: &mut R,
    mut counter: Option<&mut OpCounter>,
) -> Result<Vec<PaillierCiphertext>> {
    x.iter().map(|xi| encrypt(xi, kp, rng, counter.as_deref_mut())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PerturbationReport {
    pub trials: usize,
    pub incorrect: usize,
}

impl PerturbationReport {
    pub fn incorrect_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.incorrect as f64 / self.trials as f64
        }
    }
}

/// Encrypts `x2` under `g + delta` instead of `g` and reports whether the
/// homomorphic sum with `E(x1)` still decrypts to `x1 + x2 mod n`.
pub fn perturbed_sum_is_correct<R: Rng + ?Sized>(kp: &PaillierKeypair, x1: &BigUint, x2: &BigUint, delta: &BigUint, rng: &mut R) -> Result<bool> {
    let c1 = encrypt(x1, kp, rng, None)?;
    if x2 >= &kp.n {
        return Err(Error::PlaintextOutOfRange);
    }
    let nn = &kp.n_squared;
    let g_bad = (&kp.g + delta) % nn;
    let r = random_nonce(&kp.n, rng);
    let c2 = PaillierCiphertext { value: (g_bad.modpow(x2, nn) * r.modpow(&kp.n, nn)) % nn, n: kp.n.clone(), r_used: None };
    let sum = homomorphic_add(&c1, &c2, kp)?;
    let expected = (x1 + x2) % &kp.n;
    Ok(matches!(decrypt(&sum, kp), Ok(v) if v == expected))
}

/// Repeats [`perturbed_sum_is_correct`] with random nonzero plaintexts and random nonzero `delta < n²`.
pub fn perturbation_demo<R: Rng + ?Sized>(kp: &PaillierKeypair, trials: usize, rng: &mut R) -> Result<PerturbationReport> {
    let mut incorrect = 0;
    for _ in 0..trials {
        let x1 = rng.gen_biguint_below(&kp.n);
        let x2 = rng.gen_biguint_range(&BigUint::one(), &kp.n);
        let delta = rng.gen_biguint_range(&BigUint::one(), &kp.n_squared);
        if !perturbed_sum_is_correct(kp, &x1, &x2, &delta, rng)? {
            incorrect += 1;
        }
    }
    Ok(PerturbationReport { trials, incorrect })
}
