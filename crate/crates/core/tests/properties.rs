mod common;

use htelog::cipher::{self, KeyRecord, Scheme};
use htelog::codec::{self, MappingSpec, Value};
use htelog::opcount::{self, OpCounter};
use htelog::paillier::{self, PaillierKeypair};
use htelog::pipeline::{
    append_column, decrypt_log, encrypt_log, ColumnMode, ColumnSchema, EncryptedLog, EventLog, KeyRing, Payload, Schema,
};
use htelog::transforms::{self, MatrixKind};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use common::*;

fn key_expr() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..=1000).prop_map(|c| c.to_string()),
        (1u32..=1000).prop_map(|d| format!("sqrt({d})")),
        (1u32..=50, 2u32..=50).prop_map(|(c, d)| format!("{c}*sqrt({d})")),
        (-1000.0..-1.0f64).prop_map(|v| format!("{v}")),
    ]
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Hte), Just(Scheme::Whe)]
}

fn vector(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0e4..1.0e4f64, 1..=max)
}

#[test]
fn zero_count_matches_built_matrix() {
    for l in 1..=10 {
        let z = transforms::zero_count_recurrence(l).unwrap() as usize;
        for kind in [MatrixKind::HaarNormalized, MatrixKind::HaarUnnormalized] {
            assert_eq!(transforms::build(kind, l).unwrap().zeros(), z, "{kind} l={l}");
        }
    }
    for l in 1..=6 {
        assert_eq!(transforms::zero_count_recurrence(l).unwrap() as usize, zero_entries(&haar_dense(1 << l)));
    }
}

#[test]
fn haar_nonzeros_are_n_times_l_plus_one() {
    for l in 1..=10 {
        let n = 1usize << l;
        assert_eq!(transforms::build_haar_normalized(l).unwrap().nonzeros(), n * (l as usize + 1));
    }
}

#[test]
fn builders_agree_with_definitions() {
    for l in 1..=6 {
        let n = 1usize << l;
        assert_eq!(transforms::build_haar_normalized(l).unwrap().to_dense(), haar_dense(n), "haar l={l}");
        assert_eq!(transforms::build_walsh_hadamard(l).unwrap().to_dense(), walsh_dense(n), "wh l={l}");
        let raw = transforms::build_haar_unnormalized(l).unwrap().to_dense();
        for (r, row) in haar_dense(n).iter().enumerate() {
            // Each row of the raw matrix is the normalized row divided by its weight.
            let w = row.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let scaled: Vec<f64> = row.iter().map(|v| v / w).collect();
            assert!(max_abs_diff(&raw[r], &scaled) < 1e-15, "raw l={l} row {r}");
        }
    }
}

#[test]
fn orthogonality_for_small_levels() {
    for l in 1..=8 {
        for kind in [MatrixKind::HaarNormalized, MatrixKind::WalshHadamard] {
            assert!(transforms::orthogonality_residual(&transforms::build(kind, l).unwrap()) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counter_matches_formula(l in 1u32..=9, s in scheme()) {
        let n = 1usize << l;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut c = OpCounter::nominal();
        let key = KeyRecord::new("k", "o", "1").unwrap();
        cipher::encrypt(&codec::PaddedVector::exact(x).unwrap(), &key, s, Some(&mut c)).unwrap();
        let f = opcount::formula_counts(s, l).unwrap();
        prop_assert_eq!(c.as_u64().unwrap(), f);
        let be = transforms::op_count_formulas(s.matrix_kind(), l).unwrap();
        prop_assert_eq!(f, be);
    }

    #[test]
    fn encryption_is_linear(a in vector(64), b_seed in any::<u64>(), alpha in -10.0..10.0f64, beta in -10.0..10.0f64, e in key_expr(), s in scheme()) {
        let n = a.len().max(2).next_power_of_two();
        let mut rng = ChaCha20Rng::seed_from_u64(b_seed);
        let b: Vec<f64> = (0..a.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0e4..1.0e4)).collect();
        let key = KeyRecord::new("k", "o", &e).unwrap();
        let enc = |v: &[f64]| cipher::encrypt(&codec::pad_to_block(v, Some(n)).unwrap(), &key, s, None).unwrap().values;
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = enc(&mix);
        let rhs: Vec<f64> = enc(&a).iter().zip(enc(&b)).map(|(x, y)| alpha * x + beta * y).collect();
        let scale = 1.0 + lhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-12);
    }

    #[test]
    fn cipher_roundtrip(x in vector(128), e in key_expr(), s in scheme()) {
        let key = KeyRecord::new("k", "o", &e).unwrap();
        let y = cipher::encrypt(&codec::pad_to_block(&x, None).unwrap(), &key, s, None).unwrap();
        let back = cipher::decrypt(&y, &key, None).unwrap();
        prop_assert!(max_abs_diff(back.payload(), &x) <= 1e-9);
        prop_assert!(back.values()[x.len()..].iter().all(|v| v.abs() <= 1e-9));
    }

    #[test]
    fn haar_matches_oracle(x in vector(64), e in key_expr()) {
        let key = KeyRecord::new("k", "o", &e).unwrap();
        let padded = codec::pad_to_block(&x, None).unwrap();
        let y = cipher::encrypt(&padded, &key, Scheme::Hte, None).unwrap();
        let want = hte(padded.values(), key.value());
        let scale = 1.0 + want.iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!(max_abs_diff(&y.values, &want) / scale < 1e-12);
    }

    #[test]
    fn wrong_key_breaks_integer_payload(x in prop::collection::vec(1i64..10_000, 2..=32), c in 2u32..100, delta in 0.01..0.5f64) {
        let key = KeyRecord::new("k", "o", &c.to_string()).unwrap();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let y = cipher::encrypt(&codec::pad_to_block(&xf, None).unwrap(), &key, Scheme::Hte, None).unwrap();
        let wrong = f64::from(c) + delta;
        let back = cipher::decrypt_unchecked(&y, wrong, None).unwrap();
        prop_assert!(codec::unmap(back.values(), &MappingSpec::numeric(), back.payload_len()).is_err());
    }

    #[test]
    fn word_roundtrip(word in "[a-zA-Z]{1,20}", e in key_expr()) {
        let spec = MappingSpec::alpha_word();
        let key = KeyRecord::new("k", "o", &e).unwrap();
        let padded = codec::map_word(&word, &spec).unwrap();
        prop_assert_eq!(padded.values(), &letters(&word)[..]);
        let y = cipher::encrypt(&padded, &key, Scheme::Hte, None).unwrap();
        let x = cipher::decrypt(&y, &key, None).unwrap();
        let got = codec::unmap(x.values(), &spec, x.payload_len()).unwrap();
        prop_assert_eq!(got, vec![Value::Text(word.to_ascii_lowercase())]);
    }

    #[test]
    fn reencrypt_equals_fresh_encryption(x in vector(32), a in key_expr(), b in key_expr()) {
        let old = KeyRecord::new("old", "o", &a).unwrap();
        let new = KeyRecord::new("new", "o", &b).unwrap();
        let padded = codec::pad_to_block(&x, None).unwrap();
        let moved = cipher::reencrypt(&cipher::encrypt(&padded, &old, Scheme::Hte, None).unwrap(), &old, &new).unwrap();
        let fresh = cipher::encrypt(&padded, &new, Scheme::Hte, None).unwrap();
        prop_assert_eq!(&moved.key_id, "new");
        let scale = 1.0 + fresh.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!(max_abs_diff(&moved.values, &fresh.values) / scale < 1e-12);
    }

    #[test]
    fn restore_row_order_inverts_shuffles(l in 1u32..=6, seed in any::<u64>(), kind in prop_oneof![Just(MatrixKind::HaarNormalized), Just(MatrixKind::HaarUnnormalized), Just(MatrixKind::WalshHadamard)]) {
        let m = transforms::build(kind, l).unwrap();
        let mut order: Vec<usize> = (0..m.order()).collect();
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut ChaCha20Rng::seed_from_u64(seed));
        let shuffled = m.permute_rows(&order).unwrap();
        prop_assert_eq!(transforms::restore_row_order(&shuffled).unwrap(), order);
        prop_assert_eq!(transforms::reorder_canonical(&shuffled).unwrap(), m);
    }
}

fn paillier_small() -> PaillierKeypair {
    paillier::keygen_explicit(&BigUint::from(3u32), &BigUint::from(5u32), &BigUint::from(22u32)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paillier_roundtrip_and_sum(seed in any::<u64>(), x1 in any::<u64>(), x2 in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let kp = paillier::keygen_random(24, &mut rng).unwrap();
        let n = kp.n().clone();
        let (x1, x2) = (BigUint::from(x1) % &n, BigUint::from(x2) % &n);
        let c1 = paillier::encrypt(&x1, &kp, &mut rng, None).unwrap();
        let c2 = paillier::encrypt(&x2, &kp, &mut rng, None).unwrap();
        prop_assert_eq!(paillier::decrypt(&c1, &kp).unwrap(), x1.clone());
        let sum = paillier::homomorphic_add(&c1, &c2, &kp).unwrap();
        prop_assert_eq!(paillier::decrypt(&sum, &kp).unwrap(), (x1 + x2) % n);
    }

    #[test]
    fn paillier_keypair_json_roundtrip(x in 0u32..15) {
        let kp = paillier_small();
        let back = PaillierKeypair::from_json(&serde_json::to_string(&kp).unwrap()).unwrap();
        prop_assert_eq!(&back, &kp);
        let c = paillier::encrypt_with_nonce(&BigUint::from(x), &back, &BigUint::from(2u32), None).unwrap();
        prop_assert_eq!(paillier::decrypt(&c, &kp).unwrap(), BigUint::from(x));
    }
}

fn table_schema() -> Schema {
    Schema::new(vec![
        ColumnSchema::new("case", MappingSpec::numeric(), ColumnMode::VectorPerColumn, "zs", Scheme::Hte),
        ColumnSchema::new("act", MappingSpec::alpha_symbol(), ColumnMode::VectorPerColumn, "zs", Scheme::Whe),
        ColumnSchema::new("who", MappingSpec::alpha_word(), ColumnMode::VectorPerCell, "z1", Scheme::Hte),
    ])
}

fn table_keys() -> KeyRing {
    KeyRing::new(vec![
        KeyRecord::new("zs", "org1", "sqrt(8)").unwrap().with_grants(["org2", "pm"]),
        KeyRecord::new("z1", "org1", "2").unwrap().with_grants(["pm"]),
        KeyRecord::new("z2", "org2", "sqrt(2)").unwrap().with_grants(["pm"]),
    ])
    .unwrap()
}

fn row() -> impl Strategy<Value = (i64, char, String)> {
    (-100_000i64..100_000, prop::char::range('A', 'Z'), "[a-z]{1,9}")
}

fn build_log(rows: &[(i64, char, String)]) -> EventLog {
    let rows = rows.iter().map(|(c, a, w)| vec![Value::Int(*c), Value::Text(a.to_string()), Value::Text(w.clone())]).collect();
    EventLog::new(table_schema(), rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_roundtrip(rows in prop::collection::vec(row(), 1..40)) {
        let log = build_log(&rows);
        let keys = table_keys();
        let enc = encrypt_log(&log, &keys, "org1", None).unwrap();
        let back = EncryptedLog::from_json(&enc.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &enc);
        prop_assert_eq!(decrypt_log(&back, &keys).unwrap(), log.clone());
        let csv = log.to_csv_string().unwrap();
        prop_assert_eq!(EventLog::from_csv(csv.as_bytes(), &table_schema()).unwrap(), log);
    }

    #[test]
    fn serialized_log_never_carries_key_values(rows in prop::collection::vec(row(), 1..12)) {
        let enc = encrypt_log(&build_log(&rows), &table_keys(), "org1", None).unwrap();
        let json = enc.to_json().unwrap();
        let leaks = ["sqrt", "\"value\""].iter().any(|s| json.contains(s));
        prop_assert!(!leaks);
    }

    #[test]
    fn append_leaves_existing_payloads_untouched(rows in prop::collection::vec(row(), 1..20), extra in prop::collection::vec(0i64..300, 20)) {
        let keys = table_keys();
        let enc = encrypt_log(&build_log(&rows), &keys, "org1", None).unwrap();
        let before: Vec<String> = enc.columns.iter().map(|c| serde_json::to_string(c).unwrap()).collect();
        let hr = ColumnSchema::new("hr", MappingSpec::numeric(), ColumnMode::VectorPerColumn, "z2", Scheme::Hte);
        let raw: Vec<String> = extra[..rows.len()].iter().map(|v| v.to_string()).collect();
        let out = append_column(&enc, "org2", hr, &raw, &keys, None).unwrap();
        let after: Vec<String> = out.columns.iter().map(|c| serde_json::to_string(c).unwrap()).collect();
        prop_assert_eq!(&after[..before.len()], &before[..]);
        let single_vector = matches!(out.column("hr").unwrap().payload, Payload::Column { .. });
        prop_assert!(single_vector);
    }
}

/// Exhaustive search over integer keys recovers nothing without the exact value.
#[test]
fn integer_key_scan_misses_irrational_key() {
    let key = KeyRecord::new("k", "o", "3*sqrt(7)").unwrap();
    let x: Vec<f64> = vec![72., 78., 60., 75., 58., 60., 90., 93.];
    let y = cipher::encrypt(&codec::PaddedVector::exact(x).unwrap(), &key, Scheme::Hte, None).unwrap();
    let hits = (1..=1000)
        .filter(|&c| {
            let back = cipher::decrypt_unchecked(&y, f64::from(c), None).unwrap();
            codec::unmap(back.values(), &MappingSpec::numeric(), back.payload_len()).is_ok()
        })
        .count();
    assert_eq!(hits, 0);
}
