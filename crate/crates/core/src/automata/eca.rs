//! Elementary cellular automata on a periodic ring, bit-packed into `u64` words.
//!
//! Cell `i` lives in word `i / 64`, bit `i % 64`. The neighborhood of cell `i`
//! is read as the three-bit number `(row[i-1] << 2) | (row[i] << 1) | row[i+1]`
//! with indices taken modulo the width, which is Wolfram's numbering.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::AutomataError;
use crate::canonical::Canonical;

const WORD: usize = 64;

/// An elementary rule in Wolfram numbering together with its lookup table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct EcaRule {
    index: u8,
    table: [bool; 8],
}

impl EcaRule {
    pub fn new(rule_index: u32) -> Result<Self, AutomataError> {
        let index = u8::try_from(rule_index).map_err(|_| AutomataError::RuleOutOfRange(rule_index))?;
        let mut table = [false; 8];
        for (n, out) in table.iter_mut().enumerate() {
            *out = (index >> n) & 1 == 1;
        }
        Ok(Self { index, table })
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    /// Output bit for the neighborhood value `0..8`.
    pub fn output(&self, neighborhood: u8) -> bool {
        self.table[usize::from(neighborhood & 7)]
    }

    pub fn table(&self) -> &[bool; 8] {
        &self.table
    }

    /// Coefficients `(left, center, right)` when the rule is XOR-linear with no
    /// constant term, i.e. `new = a·l ⊕ b·c ⊕ d·r` over GF(2).
    pub fn linear_coefficients(&self) -> Option<(bool, bool, bool)> {
        let left = self.table[0b100];
        let center = self.table[0b010];
        let right = self.table[0b001];
        if self.table[0] {
            return None;
        }
        let linear = (0u8..8).all(|n| {
            let expected = (left && n & 4 != 0) ^ (center && n & 2 != 0) ^ (right && n & 1 != 0);
            self.table[usize::from(n)] == expected
        });
        linear.then_some((left, center, right))
    }
}

impl TryFrom<u32> for EcaRule {
    type Error = AutomataError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<EcaRule> for u32 {
    fn from(rule: EcaRule) -> u32 {
        u32::from(rule.index)
    }
}

impl fmt::Display for EcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.index)
    }
}

/// One row of a periodic elementary CA.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EcaRow {
    width: usize,
    words: Vec<u64>,
}

impl EcaRow {
    pub const MIN_WIDTH: usize = 3;

    pub fn zeros(width: usize) -> Result<Self, AutomataError> {
        if width < Self::MIN_WIDTH {
            return Err(AutomataError::WidthTooSmall(width));
        }
        Ok(Self { width, words: vec![0; width.div_ceil(WORD)] })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, AutomataError> {
        let mut row = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        Ok(row)
    }

    /// Parses a string of `0`/`1` characters, cell 0 first.
    pub fn parse(text: &str) -> Result<Self, AutomataError> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(AutomataError::BadCell(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(&bits)
    }

    /// Uniform random row.
    pub fn random(width: usize, rng: &mut (impl RngCore + ?Sized)) -> Result<Self, AutomataError> {
        let mut row = Self::zeros(width)?;
        for w in row.words.iter_mut() {
            *w = rng.next_u64();
        }
        row.mask_tail();
        Ok(row)
    }

    /// Rebuilds a row from its packed little-endian byte form.
    pub fn from_packed_bytes(width: usize, bytes: &[u8]) -> Result<Self, AutomataError> {
        let mut row = Self::zeros(width)?;
        if bytes.len() != width.div_ceil(8) {
            return Err(AutomataError::PackedLength { width, bytes: bytes.len() });
        }
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            row.words[i] = u64::from_le_bytes(buf);
        }
        row.mask_tail();
        Ok(row)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, i: usize) -> bool {
        let i = i % self.width;
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let i = i % self.width;
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let i = i % self.width;
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    /// Packed little-endian bytes, `ceil(width / 8)` of them; padding bits are zero.
    pub fn packed_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.width.div_ceil(8));
        out
    }

    /// Number of differing cells. Widths must match.
    pub fn hamming(&self, other: &EcaRow) -> usize {
        assert_eq!(self.width, other.width, "hamming distance needs equal widths");
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &EcaRow) -> EcaRow {
        assert_eq!(self.width, other.width, "xor needs equal widths");
        EcaRow { width: self.width, words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect() }
    }

    /// Cyclic shift: `out[i] = self[i - k]` (periodic).
    pub fn rotated(&self, k: usize) -> EcaRow {
        let k = k % self.width;
        if k == 0 {
            return self.clone();
        }
        if self.width <= WORD {
            let mask = tail_mask(self.width);
            let w = self.words[0];
            let out = ((w << k) | (w >> (self.width - k))) & mask;
            return EcaRow { width: self.width, words: vec![out] };
        }
        let mut out = EcaRow { width: self.width, words: vec![0; self.words.len()] };
        for i in 0..self.width {
            if self.get(i) {
                out.set(i + k, true);
            }
        }
        out
    }

    /// `out[i] = self[i - 1]`, the left neighbor of every cell.
    fn left_neighbors(&self) -> Vec<u64> {
        let n = self.words.len();
        let top = (self.width - 1) % WORD;
        let wrap = (self.words[n - 1] >> top) & 1;
        let mut out = vec![0u64; n];
        let mut carry = wrap;
        for (o, &w) in out.iter_mut().zip(&self.words) {
            *o = (w << 1) | carry;
            carry = w >> (WORD - 1);
        }
        out[n - 1] &= tail_mask(self.width);
        out
    }

    /// `out[i] = self[i + 1]`, the right neighbor of every cell.
    fn right_neighbors(&self) -> Vec<u64> {
        let n = self.words.len();
        let top = (self.width - 1) % WORD;
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            let next_low = if i + 1 < n { self.words[i + 1] & 1 } else { 0 };
            *o = (self.words[i] >> 1) | (next_low << (WORD - 1));
        }
        let first = self.words[0] & 1;
        out[n - 1] = (out[n - 1] & !(1u64 << top)) | (first << top);
        out[n - 1] &= tail_mask(self.width);
        out
    }

    fn mask_tail(&mut self) {
        let n = self.words.len();
        self.words[n - 1] &= tail_mask(self.width);
    }
}

fn tail_mask(width: usize) -> u64 {
    match width % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl fmt::Debug for EcaRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EcaRow({self})")
    }
}

impl fmt::Display for EcaRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Canonical for EcaRow {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend(self.packed_bytes());
    }
}

/// One synchronous update of every cell with periodic boundary.
pub fn eca_step(row: &EcaRow, rule: &EcaRule) -> EcaRow {
    let left = row.left_neighbors();
    let right = row.right_neighbors();
    let mut words = vec![0u64; row.words.len()];
    for (i, out) in words.iter_mut().enumerate() {
        let (l, c, r) = (left[i], row.words[i], right[i]);
        let mut acc = 0u64;
        for n in 0u8..8 {
            if rule.output(n) {
                let lt = if n & 4 != 0 { l } else { !l };
                let ct = if n & 2 != 0 { c } else { !c };
                let rt = if n & 1 != 0 { r } else { !r };
                acc |= lt & ct & rt;
            }
        }
        *out = acc;
    }
    let mut next = EcaRow { width: row.width, words };
    next.mask_tail();
    next
}

/// `steps` applications of [`eca_step`].
pub fn eca_evolve(row: &EcaRow, rule: &EcaRule, steps: u64) -> EcaRow {
    let mut current = row.clone();
    for _ in 0..steps {
        current = eca_step(&current, rule);
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_step(row: &EcaRow, rule: &EcaRule) -> EcaRow {
        let w = row.width();
        let bits: Vec<bool> = (0..w)
            .map(|i| {
                let l = row.get((i + w - 1) % w) as u8;
                let c = row.get(i) as u8;
                let r = row.get((i + 1) % w) as u8;
                rule.output((l << 2) | (c << 1) | r)
            })
            .collect();
        EcaRow::from_bits(&bits).unwrap()
    }

    #[test]
    fn rule_110_table_matches_binary_expansion() {
        let rule = EcaRule::new(110).unwrap();
        // 111,110,101,100,011,010,001,000
        let expected = [false, true, true, false, true, true, true, false];
        for (k, n) in (0..8u8).rev().enumerate() {
            assert_eq!(rule.output(n), expected[k], "neighborhood {n:03b}");
        }
    }

    #[test]
    fn saturating_rules() {
        assert!(EcaRule::new(0).unwrap().table().iter().all(|&b| !b));
        assert!(EcaRule::new(255).unwrap().table().iter().all(|&b| b));
        assert!(matches!(EcaRule::new(256), Err(AutomataError::RuleOutOfRange(256))));
    }

    #[test]
    fn width_below_three_rejected() {
        assert!(EcaRow::zeros(2).is_err());
        assert!(EcaRow::parse("01").is_err());
    }

    #[test]
    fn single_seed_rule_90_and_110() {
        let row = EcaRow::parse("0001000").unwrap();
        assert_eq!(eca_step(&row, &EcaRule::new(90).unwrap()).to_string(), "0010100");
        assert_eq!(eca_step(&row, &EcaRule::new(110).unwrap()).to_string(), "0011000");
    }

    #[test]
    fn zero_row_stays_zero_for_quiescent_rules() {
        for idx in (0u32..256).filter(|i| i & 1 == 0) {
            let rule = EcaRule::new(idx).unwrap();
            for width in [3, 7, 64, 65, 130] {
                assert!(eca_step(&EcaRow::zeros(width).unwrap(), &rule).is_zero(), "rule {idx} width {width}");
            }
        }
    }

    #[test]
    fn linear_rules_detected() {
        let linear: Vec<u32> = (0..256).filter(|&i| EcaRule::new(i).unwrap().linear_coefficients().is_some()).collect();
        assert_eq!(linear, vec![0, 60, 90, 102, 150, 170, 204, 240]);
    }

    #[test]
    fn wraparound_at_word_boundaries() {
        for width in [63, 64, 65, 127, 128, 129] {
            let mut row = EcaRow::zeros(width).unwrap();
            row.set(0, true);
            let next = eca_step(&row, &EcaRule::new(90).unwrap());
            assert!(next.get(1) && next.get(width - 1) && next.count_ones() == 2, "width {width}");
            row = EcaRow::zeros(width).unwrap();
            row.set(width - 1, true);
            let next = eca_step(&row, &EcaRule::new(90).unwrap());
            assert!(next.get(0) && next.get(width - 2) && next.count_ones() == 2, "width {width}");
        }
    }

    proptest! {
        #[test]
        fn packed_step_matches_per_cell(rule in 0u32..256, bits in proptest::collection::vec(any::<bool>(), 3..200)) {
            let row = EcaRow::from_bits(&bits).unwrap();
            let rule = EcaRule::new(rule).unwrap();
            prop_assert_eq!(eca_step(&row, &rule), naive_step(&row, &rule));
        }

        #[test]
        fn rule_90_is_additive(pair in (3usize..150).prop_flat_map(|w| (
            proptest::collection::vec(any::<bool>(), w),
            proptest::collection::vec(any::<bool>(), w),
        ))) {
            let rule = EcaRule::new(90).unwrap();
            let a = EcaRow::from_bits(&pair.0).unwrap();
            let b = EcaRow::from_bits(&pair.1).unwrap();
            prop_assert_eq!(eca_step(&a.xor(&b), &rule), eca_step(&a, &rule).xor(&eca_step(&b, &rule)));
        }

        #[test]
        fn rotation_matches_index_shift(bits in proptest::collection::vec(any::<bool>(), 3..150), k in 0usize..400) {
            let row = EcaRow::from_bits(&bits).unwrap();
            let rot = row.rotated(k);
            let w = row.width();
            for i in 0..w {
                prop_assert_eq!(rot.get((i + k) % w), row.get(i));
            }
        }

        #[test]
        fn packed_bytes_round_trip(bits in proptest::collection::vec(any::<bool>(), 3..150)) {
            let row = EcaRow::from_bits(&bits).unwrap();
            prop_assert_eq!(EcaRow::from_packed_bytes(row.width(), &row.packed_bytes()).unwrap(), row);
        }
    }
}
