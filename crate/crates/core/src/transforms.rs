//! Haar and Walsh-Hadamard matrices of order `N = 2^l`.
//!
//! Entries are stored exactly as `mantissa * 2^(half_exp / 2)` with
//! `mantissa ∈ {-1, 0, 1}` and rendered to `f64` on demand, so the
//! `±2^(a/2)` weights of the normalized Haar matrix carry no build-time
//! rounding.
//!
//! Application is the dense row-by-row product with zero entries skipped;
//! this is also the only path that ever feeds an [`OpCounter`].

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::opcount::{OpCount, OpCounter};
use crate::{Error, Result};

/// Largest supported `l` for dense matrices.
pub const MAX_LEVEL: u32 = 16;

/// Largest `l` accepted by the closed-form counting functions.
pub const MAX_FORMULA_LEVEL: u32 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    HaarNormalized,
    HaarUnnormalized,
    WalshHadamard,
}

impl MatrixKind {
    pub fn is_haar(self) -> bool {
        !matches!(self, MatrixKind::WalshHadamard)
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::HaarNormalized => "haar",
            MatrixKind::HaarUnnormalized => "haar-raw",
            MatrixKind::WalshHadamard => "wh",
        })
    }
}

/// An exact matrix entry `mantissa * 2^(half_exp / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Entry {
    pub mantissa: i8,
    pub half_exp: u8,
}

impl Entry {
    pub const ZERO: Entry = Entry { mantissa: 0, half_exp: 0 };
    pub const ONE: Entry = Entry { mantissa: 1, half_exp: 0 };
    pub const MINUS_ONE: Entry = Entry { mantissa: -1, half_exp: 0 };

    pub fn new(mantissa: i8, half_exp: u8) -> Self {
        Entry { mantissa, half_exp }
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.mantissa == 0 {
            return 0.0;
        }
        let whole = (1u64 << (self.half_exp / 2)) as f64;
        let w = if self.half_exp % 2 == 1 { whole * SQRT_2 } else { whole };
        f64::from(self.mantissa) * w
    }

    fn neg(self) -> Self {
        Entry { mantissa: -self.mantissa, half_exp: self.half_exp }
    }
}

/// Decomposition `υ = 2^a + b - 1` of a Haar row index.
///
/// Row 0 is the constant function and decomposes to `a = 0, b = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarIndex {
    pub upsilon: usize,
    pub a: u32,
    pub b: usize,
}

impl HaarIndex {
    pub fn decompose(upsilon: usize) -> Self {
        if upsilon == 0 {
            return HaarIndex { upsilon, a: 0, b: 0 };
        }
        let a = usize::BITS - 1 - upsilon.leading_zeros();
        HaarIndex { upsilon, a, b: upsilon - (1 << a) + 1 }
    }

    pub fn compose(a: u32, b: usize) -> Option<Self> {
        if b == 0 || b > (1 << a) {
            return None;
        }
        Some(HaarIndex { upsilon: (1 << a) + b - 1, a, b })
    }

    /// Positive row weight of the normalized Haar row: `2^(a/2)`, or 1 for row 0.
    pub fn weight(self) -> f64 {
        if self.upsilon == 0 {
            1.0
        } else {
            Entry::new(1, self.a as u8).to_f64()
        }
    }
}

/// A square Haar or Walsh-Hadamard matrix of order `n = 2^l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformMatrix {
    kind: MatrixKind,
    l: u32,
    n: usize,
    entries: Vec<Entry>,
}

fn check_level(l: u32) -> Result<usize> {
    if (1..=MAX_LEVEL).contains(&l) {
        Ok(1usize << l)
    } else {
        Err(Error::LevelOutOfRange(l))
    }
}

impl TransformMatrix {
    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.l
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> Entry {
        self.entries[row * self.n + col]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.entry(row, col).to_f64()
    }

    pub fn row_entries(&self, row: usize) -> &[Entry] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.row_entries(row).iter().map(|e| e.to_f64()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|r| self.row(r)).collect()
    }

    pub fn zeros(&self) -> usize {
        self.entries.iter().filter(|e| e.is_zero()).count()
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len() - self.zeros()
    }

    /// New matrix whose row `i` is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: order.len() });
        }
        let mut seen = vec![false; self.n];
        let mut entries = Vec::with_capacity(self.entries.len());
        for &src in order {
            if src >= self.n || std::mem::replace(&mut seen[src], true) {
                return Err(Error::NotAPermutation(self.kind.to_string()));
            }
            entries.extend_from_slice(self.row_entries(src));
        }
        Ok(TransformMatrix { entries, ..*self })
    }

    /// Wraps raw rows; only the shape is checked.
    pub fn from_rows(kind: MatrixKind, rows: Vec<Vec<Entry>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let l = n.trailing_zeros();
        check_level(l)?;
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.len() });
            }
            entries.extend(r);
        }
        Ok(TransformMatrix { kind, l, n, entries })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.n {
            let cells: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Right-aligned text rendering with six decimals for irrational entries.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = (0..self.n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|v| if v.fract() == 0.0 { format!("{v}") } else { format!("{v:.6}") })
                    .collect()
            })
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        let mut s = String::new();
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }
}

/// Recursive un-normalized Haar matrix:
/// `H_2N = [H_N ⊗ [1, 1]; I_N ⊗ [1, -1]]`, starting from `H_2 = [[1, 1], [1, -1]]`.
pub fn build_haar_unnormalized(l: u32) -> Result<TransformMatrix> {
    check_level(l)?;
    let mut size = 2usize;
    let mut cur = vec![Entry::ONE, Entry::ONE, Entry::ONE, Entry::MINUS_ONE];
    for _ in 1..l {
        let next_size = size * 2;
        let mut next = vec![Entry::ZERO; next_size * next_size];
        for r in 0..size {
            for c in 0..size {
                let e = cur[r * size + c];
                next[r * next_size + 2 * c] = e;
                next[r * next_size + 2 * c + 1] = e;
            }
        }
        for i in 0..size {
            let r = size + i;
            next[r * next_size + 2 * i] = Entry::ONE;
            next[r * next_size + 2 * i + 1] = Entry::MINUS_ONE;
        }
        cur = next;
        size = next_size;
    }
    Ok(TransformMatrix { kind: MatrixKind::HaarUnnormalized, l, n: size, entries: cur })
}

/// Haar functions sampled at `φ = e/N`, with the common `1/√N` factored out:
/// row 0 is all ones, row `(a, b)` carries `+2^(a/2)` on the first half of its
/// support and `-2^(a/2)` on the second half.
pub fn build_haar_normalized(l: u32) -> Result<TransformMatrix> {
    let n = check_level(l)?;
    let mut entries = vec![Entry::ZERO; n * n];
    entries[..n].fill(Entry::ONE);
    for upsilon in 1..n {
        let idx = HaarIndex::decompose(upsilon);
        let width = n >> idx.a;
        let start = (idx.b - 1) * width;
        let half = width / 2;
        let plus = Entry::new(1, idx.a as u8);
        let row = &mut entries[upsilon * n..(upsilon + 1) * n];
        row[start..start + half].fill(plus);
        row[start + half..start + width].fill(plus.neg());
    }
    Ok(TransformMatrix { kind: MatrixKind::HaarNormalized, l, n, entries })
}

/// Sylvester construction `H̄_2N = H̄_N ⊗ H̄_2`.
pub fn build_walsh_hadamard(l: u32) -> Result<TransformMatrix> {
    check_level(l)?;
    let mut size = 1usize;
    let mut cur = vec![Entry::ONE];
    for _ in 0..l {
        let next_size = size * 2;
        let mut next = vec![Entry::ZERO; next_size * next_size];
        for r in 0..size {
            for c in 0..size {
                let e = cur[r * size + c];
                next[(2 * r) * next_size + 2 * c] = e;
                next[(2 * r) * next_size + 2 * c + 1] = e;
                next[(2 * r + 1) * next_size + 2 * c] = e;
                next[(2 * r + 1) * next_size + 2 * c + 1] = e.neg();
            }
        }
        cur = next;
        size = next_size;
    }
    Ok(TransformMatrix { kind: MatrixKind::WalshHadamard, l, n: size, entries: cur })
}

pub fn build(kind: MatrixKind, l: u32) -> Result<TransformMatrix> {
    match kind {
        MatrixKind::HaarNormalized => build_haar_normalized(l),
        MatrixKind::HaarUnnormalized => build_haar_unnormalized(l),
        MatrixKind::WalshHadamard => build_walsh_hadamard(l),
    }
}

fn flush_counts(counter: Option<&mut OpCounter>, mul: u64, add: u64) {
    if let Some(c) = counter {
        c.record_mul(mul);
        c.record_add(add);
    }
}

/// Dense product `M·x`.
///
/// With a counter attached, each nonzero entry visited is one
/// multiplication and each row with `k` nonzeros costs `k - 1` additions.
pub fn apply(matrix: &TransformMatrix, x: &[f64], counter: Option<&mut OpCounter>) -> Result<Vec<f64>> {
    let n = matrix.n;
    if x.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x.len() });
    }
    let (mut mul, mut add) = (0u64, 0u64);
    let mut y = Vec::with_capacity(n);
    for r in 0..n {
        let mut acc = 0.0;
        let mut terms = 0u64;
        for (e, &xv) in matrix.row_entries(r).iter().zip(x) {
            if e.is_zero() {
                continue;
            }
            acc += e.to_f64() * xv;
            terms += 1;
        }
        mul += terms;
        add += terms.saturating_sub(1);
        y.push(acc);
    }
    flush_counts(counter, mul, add);
    Ok(y)
}

/// Dense product `Mᵀ·y`, counted the same way as [`apply`].
pub fn apply_transpose(matrix: &TransformMatrix, y: &[f64], counter: Option<&mut OpCounter>) -> Result<Vec<f64>> {
    let n = matrix.n;
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len() });
    }
    let (mut mul, mut add) = (0u64, 0u64);
    let mut x = Vec::with_capacity(n);
    for c in 0..n {
        let mut acc = 0.0;
        let mut terms = 0u64;
        for (r, &yv) in y.iter().enumerate() {
            let e = matrix.entry(r, c);
            if e.is_zero() {
                continue;
            }
            acc += e.to_f64() * yv;
            terms += 1;
        }
        mul += terms;
        add += terms.saturating_sub(1);
        x.push(acc);
    }
    flush_counts(counter, mul, add);
    Ok(x)
}

/// Zeros of the order-`2^l` Haar matrix:
/// `z(l) = 2(2^(2(l-1)) - 2^(l-1)) + 2 z(l-1)`, `z(1) = 0`.
pub fn zero_count_recurrence(l: u32) -> Result<u64> {
    if !(1..=MAX_FORMULA_LEVEL).contains(&l) {
        return Err(Error::LevelOutOfRange(l));
    }
    let mut z = 0u64;
    for k in 2..=l {
        let h = 1u64 << (k - 1);
        z = 2 * (h * h - h) + 2 * z;
    }
    Ok(z)
}

/// `mul = N² - z`, `add = N² - N - z`, with `z = 0` for Walsh-Hadamard.
pub fn op_count_formulas(kind: MatrixKind, l: u32) -> Result<OpCount> {
    let z = match kind {
        MatrixKind::WalshHadamard => {
            if !(1..=MAX_FORMULA_LEVEL).contains(&l) {
                return Err(Error::LevelOutOfRange(l));
            }
            0
        }
        _ => zero_count_recurrence(l)?,
    };
    let n = 1u64 << l;
    Ok(OpCount { mul: n * n - z, add: n * n - n - z })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: MatrixKind,
    pub order: usize,
    pub top_row_all_ones: bool,
    /// Only evaluated for Walsh-Hadamard.
    pub left_column_all_ones: Option<bool>,
    /// `max |(1/N)·M·Mᵀ - I|`.
    pub orthogonality_residual: f64,
    pub entries_valid: bool,
    pub canonical_order: bool,
}

impl ValidationReport {
    pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

    pub fn passed(&self) -> bool {
        let ortho = match self.kind {
            // rows of the raw matrix are orthogonal but not equal-norm
            MatrixKind::HaarUnnormalized => true,
            _ => self.orthogonality_residual <= Self::ORTHOGONALITY_TOLERANCE,
        };
        self.top_row_all_ones
            && self.left_column_all_ones.unwrap_or(true)
            && ortho
            && self.entries_valid
            && self.canonical_order
    }
}

pub fn orthogonality_residual(matrix: &TransformMatrix) -> f64 {
    let n = matrix.n;
    let dense = matrix.to_dense();
    let inv_n = 1.0 / n as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = dense[i].iter().zip(&dense[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot * inv_n - target).abs());
        }
    }
    worst
}

fn entries_valid(matrix: &TransformMatrix) -> bool {
    let n = matrix.n;
    (0..n).all(|r| {
        let allowed_exp = match matrix.kind {
            MatrixKind::HaarNormalized => HaarIndex::decompose(r).a as u8,
            _ => 0,
        };
        matrix.row_entries(r).iter().all(|e| match matrix.kind {
            MatrixKind::WalshHadamard => e.half_exp == 0 && e.mantissa.abs() == 1,
            _ => e.is_zero() || (e.mantissa.abs() == 1 && e.half_exp == allowed_exp),
        })
    })
}

pub fn validate_structure(matrix: &TransformMatrix) -> ValidationReport {
    let n = matrix.n;
    let top_row_all_ones = matrix.row_entries(0).iter().all(|&e| e == Entry::ONE);
    let left_column_all_ones = (matrix.kind == MatrixKind::WalshHadamard)
        .then(|| (0..n).all(|r| matrix.entry(r, 0) == Entry::ONE));
    let canonical_order = build(matrix.kind, matrix.l).map(|c| c == *matrix).unwrap_or(false);
    ValidationReport {
        kind: matrix.kind,
        order: n,
        top_row_all_ones,
        left_column_all_ones,
        orthogonality_residual: orthogonality_residual(matrix),
        entries_valid: entries_valid(matrix),
        canonical_order,
    }
}

/// Number of sign changes along a row, ignoring zeros.
pub fn sequency(row: &[Entry]) -> usize {
    let signs: Vec<i8> = row.iter().filter(|e| !e.is_zero()).map(|e| e.mantissa).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RowSignature {
    Sequency(usize),
    Support { offset: usize, width: usize, sign_changes: usize },
}

fn signature(kind: MatrixKind, row: &[Entry]) -> RowSignature {
    match kind {
        MatrixKind::WalshHadamard => RowSignature::Sequency(sequency(row)),
        _ => {
            let offset = row.iter().position(|e| !e.is_zero()).unwrap_or(row.len());
            let end = row.iter().rposition(|e| !e.is_zero()).map_or(offset, |p| p + 1);
            RowSignature::Support { offset, width: end - offset, sign_changes: sequency(row) }
        }
    }
}

/// Recovers the canonical position of every row of a row-permuted matrix.
///
/// Returns `perm` with `perm[i]` the canonical index of input row `i`.
/// Walsh-Hadamard rows are keyed by sequency, Haar rows by their support
/// signature; every row is then checked against its canonical row exactly.
pub fn restore_row_order(matrix: &TransformMatrix) -> Result<Vec<usize>> {
    let canonical = build(matrix.kind, matrix.l)?;
    let n = matrix.n;
    let lookup: HashMap<RowSignature, usize> =
        (0..n).map(|r| (signature(canonical.kind, canonical.row_entries(r)), r)).collect();
    debug_assert_eq!(lookup.len(), n, "canonical signatures must be distinct");

    let mut taken = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for r in 0..n {
        let row = matrix.row_entries(r);
        let target = lookup
            .get(&signature(matrix.kind, row))
            .copied()
            .filter(|&t| canonical.row_entries(t) == row && !taken[t])
            .ok_or_else(|| Error::NotAPermutation(matrix.kind.to_string()))?;
        taken[target] = true;
        perm.push(target);
    }
    Ok(perm)
}

/// Puts rows back in canonical order using [`restore_row_order`].
pub fn reorder_canonical(matrix: &TransformMatrix) -> Result<TransformMatrix> {
    let perm = restore_row_order(matrix)?;
    let mut inverse = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inverse[p] = i;
    }
    matrix.permute_rows(&inverse)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(m: &TransformMatrix) -> Vec<Vec<i32>> {
        m.to_dense().iter().map(|r| r.iter().map(|&v| v as i32).collect()).collect()
    }

    #[test]
    fn unnormalized_small_orders() {
        assert_eq!(ints(&build_haar_unnormalized(1).unwrap()), vec![vec![1, 1], vec![1, -1]]);
        assert_eq!(
            ints(&build_haar_unnormalized(2).unwrap()),
            vec![vec![1, 1, 1, 1], vec![1, 1, -1, -1], vec![1, -1, 0, 0], vec![0, 0, 1, -1]]
        );
        assert_eq!(build_haar_unnormalized(3).unwrap().row(3), vec![0., 0., 0., 0., 1., 1., -1., -1.]);
    }

    #[test]
    fn normalized_small_orders() {
        let s = SQRT_2;
        let m = build_haar_normalized(2).unwrap();
        assert_eq!(
            m.to_dense(),
            vec![vec![1., 1., 1., 1.], vec![1., 1., -1., -1.], vec![s, -s, 0., 0.], vec![0., 0., s, -s]]
        );
        let m3 = build_haar_normalized(3).unwrap();
        assert_eq!(m3.row(3), vec![0., 0., 0., 0., s, s, -s, -s]);
        assert_eq!(m3.row(7), vec![0., 0., 0., 0., 0., 0., 2., -2.]);
        for l in 1..=6 {
            assert!(build_haar_normalized(l).unwrap().row(0).iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn walsh_hadamard_small_orders() {
        assert_eq!(ints(&build_walsh_hadamard(1).unwrap()), vec![vec![1, 1], vec![1, -1]]);
        let m = build_walsh_hadamard(2).unwrap();
        assert_eq!(
            ints(&m),
            vec![vec![1, 1, 1, 1], vec![1, -1, 1, -1], vec![1, 1, -1, -1], vec![1, -1, -1, 1]]
        );
        assert_eq!(build_walsh_hadamard(5).unwrap().zeros(), 0);
    }

    #[test]
    fn level_bounds() {
        for kind in [MatrixKind::HaarNormalized, MatrixKind::HaarUnnormalized, MatrixKind::WalshHadamard] {
            assert!(matches!(build(kind, 0), Err(Error::LevelOutOfRange(0))));
            assert!(matches!(build(kind, 17), Err(Error::LevelOutOfRange(17))));
        }
        assert!(zero_count_recurrence(0).is_err());
    }

    #[test]
    fn haar_index_roundtrip() {
        for u in 1..1024 {
            let idx = HaarIndex::decompose(u);
            assert!(idx.b >= 1 && idx.b <= 1 << idx.a);
            assert_eq!(HaarIndex::compose(idx.a, idx.b), Some(idx));
        }
        assert_eq!(HaarIndex::decompose(0).weight(), 1.0);
        assert_eq!(HaarIndex::compose(2, 0), None);
        assert_eq!(HaarIndex::compose(2, 5), None);
    }

    #[test]
    fn apply_table_timestamps() {
        let m = build_haar_normalized(3).unwrap();
        let x = [620., 691., 702., 750., 850., 985., 1050., 1164.];
        let y = apply(&m, &x, None).unwrap();
        let expected = [6812., -1286., -141. * SQRT_2, -379. * SQRT_2, -142., -96., -270., -228.];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!((y[2] - (-199.40)).abs() < 0.01);
        assert!((y[3] - (-535.98)).abs() < 0.01);
    }

    #[test]
    fn apply_word_and_zero_vector() {
        let m = build_haar_normalized(2).unwrap();
        let y = apply(&m, &[20., 15., 13., 0.], None).unwrap();
        assert_eq!(y[0], 48.0);
        assert_eq!(y[1], 22.0);
        assert!((y[2] - 5.0 * SQRT_2).abs() < 1e-12);
        assert!((y[3] - 13.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(apply(&m, &[0.0; 4], None).unwrap(), vec![0.0; 4]);
        assert!(matches!(apply(&m, &[1.0; 3], None), Err(Error::LengthMismatch { expected: 4, got: 3 })));
        assert!(apply_transpose(&m, &[1.0; 5], None).is_err());
    }

    #[test]
    fn zero_counts_and_formulas() {
        assert_eq!(zero_count_recurrence(1).unwrap(), 0);
        assert_eq!(zero_count_recurrence(3).unwrap(), 32);
        assert_eq!(zero_count_recurrence(4).unwrap(), 176);
        assert_eq!(build_haar_unnormalized(3).unwrap().zeros(), 32);
        assert_eq!(op_count_formulas(MatrixKind::HaarNormalized, 3).unwrap(), OpCount { mul: 32, add: 24 });
        assert_eq!(op_count_formulas(MatrixKind::HaarNormalized, 2).unwrap(), OpCount { mul: 12, add: 8 });
        assert_eq!(op_count_formulas(MatrixKind::WalshHadamard, 3).unwrap(), OpCount { mul: 64, add: 56 });
    }

    #[test]
    fn validation_reports() {
        let wh = build_walsh_hadamard(3).unwrap();
        let r = validate_structure(&wh);
        assert!(r.passed());
        assert_eq!(r.orthogonality_residual, 0.0);
        assert_eq!(r.left_column_all_ones, Some(true));

        let swapped = wh.permute_rows(&[0, 1, 3, 2, 4, 5, 6, 7]).unwrap();
        let r = validate_structure(&swapped);
        assert!(r.top_row_all_ones);
        assert!(!r.canonical_order);
        assert!(!r.passed());

        let haar = validate_structure(&build_haar_normalized(3).unwrap());
        assert!(haar.orthogonality_residual < 1e-12);
        assert!(haar.passed());
        assert_eq!(haar.left_column_all_ones, None);

        let raw = validate_structure(&build_haar_unnormalized(3).unwrap());
        assert!(raw.passed());
        assert!(raw.orthogonality_residual > 0.1);
    }

    #[test]
    fn corrupted_entries_fail_validation() {
        let mut rows: Vec<Vec<Entry>> =
            (0..4).map(|r| build_haar_normalized(2).unwrap().row_entries(r).to_vec()).collect();
        rows[2][0] = Entry::ONE;
        let m = TransformMatrix::from_rows(MatrixKind::HaarNormalized, rows).unwrap();
        let r = validate_structure(&m);
        assert!(!r.entries_valid);
        assert!(matches!(restore_row_order(&m), Err(Error::NotAPermutation(_))));
    }

    #[test]
    fn restore_orders() {
        let wh = build_walsh_hadamard(3).unwrap();
        assert_eq!(restore_row_order(&wh).unwrap(), (0..8).collect::<Vec<_>>());
        let reversed: Vec<usize> = (0..8).rev().collect();
        assert_eq!(restore_row_order(&wh.permute_rows(&reversed).unwrap()).unwrap(), reversed);

        let haar = build_haar_normalized(3).unwrap();
        let rotated: Vec<usize> = (0..8).map(|i| (i + 1) % 8).collect();
        let shuffled = haar.permute_rows(&rotated).unwrap();
        assert_eq!(restore_row_order(&shuffled).unwrap(), rotated);
        assert_eq!(reorder_canonical(&shuffled).unwrap(), haar);

        let dup = haar.permute_rows(&[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        let mut rows: Vec<Vec<Entry>> = (0..8).map(|r| dup.row_entries(r).to_vec()).collect();
        rows[7] = rows[6].clone();
        let m = TransformMatrix::from_rows(MatrixKind::HaarNormalized, rows).unwrap();
        assert!(restore_row_order(&m).is_err());
    }

    #[test]
    fn permute_rows_rejects_non_permutations() {
        let m = build_walsh_hadamard(1).unwrap();
        assert!(m.permute_rows(&[0, 0]).is_err());
        assert!(m.permute_rows(&[0]).is_err());
        assert!(m.permute_rows(&[0, 2]).is_err());
    }

    #[test]
    fn renderings() {
        let m = build_haar_normalized(1).unwrap();
        assert_eq!(m.to_csv(), "1,1\n1,-1\n");
        let t = build_haar_normalized(2).unwrap().to_text();
        assert!(t.contains("1.414214"));
        assert_eq!(t.lines().count(), 4);
    }
}
