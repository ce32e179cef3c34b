//! Sparse pure states over classical basis words.
//!
//! Every gate the QRAM circuits need is a permutation of basis words or a
//! sign flip, so a state is just a list of branches. Storage is bit-sliced:
//! each qubit owns one bit column across all branches, and a gate becomes a
//! handful of word-wide logic operations on those columns. Branches are never
//! merged or split by a gate, only relabelled.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

pub type Amplitude = Complex64;

/// Squared magnitude below which `normalize` drops a branch.
pub const PRUNE_THRESHOLD: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("basis word has zero width")]
    ZeroWidth,
    #[error("superposition needs at least one entry")]
    Empty,
    #[error("all amplitudes are zero")]
    ZeroAmplitudes,
    #[error("duplicate basis word {0}")]
    DuplicateWord(String),
    #[error("word width {found} does not match {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("qubit {qubit} out of range for width {width}")]
    OutOfRange { qubit: usize, width: usize },
    #[error("gate operands overlap")]
    Overlap,
    #[error("controlled swap takes one or two controls, got {0}")]
    ControlCount(usize),
    #[error("amplitude is not finite")]
    NonFinite,
    #[error("invalid basis word character {0:?}")]
    BadChar(char),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId(u32);

impl QubitId {
    pub fn new(index: usize) -> Self {
        QubitId(u32::try_from(index).expect("qubit index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// A control operand: the gate fires when `qubit` reads `polarity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: QubitId,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: QubitId) -> Self {
        Control { qubit, polarity: true }
    }

    pub fn off(qubit: QubitId) -> Self {
        Control { qubit, polarity: false }
    }
}

/// Fixed-width bit string, one bit per qubit. Displayed with qubit 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisWord {
    width: usize,
    bits: Vec<u64>,
}

impl BasisWord {
    pub fn zeros(width: usize) -> Self {
        BasisWord { width, bits: vec![0; width.div_ceil(64)] }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut w = BasisWord::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            w.set(i, b);
        }
        w
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, q: usize) -> bool {
        (self.bits[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % 64);
        if v {
            self.bits[q / 64] |= m;
        } else {
            self.bits[q / 64] &= !m;
        }
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.width {
            f.write_str(if self.get(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BasisWord {
    type Err = BranchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BranchError::BadChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BasisWord::from_bits(bits))
    }
}

/// Sparse pure state.
///
/// Column `q` occupies `cols[q * stride .. (q + 1) * stride]`; bit `i` of that
/// slice is qubit `q` in branch `i`. Bits past the last branch are kept zero.
/// The sign of branch `i` lives in `signs` so that Z is a single XOR.
#[derive(Clone, Debug)]
pub struct BranchState {
    qubits: usize,
    branches: usize,
    stride: usize,
    cols: Vec<u64>,
    amps: Vec<Amplitude>,
    signs: Vec<u64>,
}

impl BranchState {
    pub fn new_basis(word: &BasisWord) -> Result<Self, BranchError> {
        Self::new_superposition(&[(word.clone(), Amplitude::new(1.0, 0.0))])
    }

    /// Builds a normalized state from explicit branches. Zero entries are
    /// dropped by the normalization prune.
    pub fn new_superposition(entries: &[(BasisWord, Amplitude)]) -> Result<Self, BranchError> {
        let first = entries.first().ok_or(BranchError::Empty)?;
        let qubits = first.0.width();
        if qubits == 0 {
            return Err(BranchError::ZeroWidth);
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for (w, a) in entries {
            if w.width() != qubits {
                return Err(BranchError::WidthMismatch { expected: qubits, found: w.width() });
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(BranchError::NonFinite);
            }
            if !seen.insert(w) {
                return Err(BranchError::DuplicateWord(w.to_string()));
            }
        }
        if entries.iter().all(|(_, a)| a.norm_sqr() == 0.0) {
            return Err(BranchError::ZeroAmplitudes);
        }

        let branches = entries.len();
        let stride = branches.div_ceil(64);
        let mut cols = vec![0u64; qubits * stride];
        for (i, (w, _)) in entries.iter().enumerate() {
            for q in 0..qubits {
                if w.get(q) {
                    cols[q * stride + i / 64] |= 1 << (i % 64);
                }
            }
        }
        let mut state = BranchState {
            qubits,
            branches,
            stride,
            cols,
            amps: entries.iter().map(|(_, a)| *a).collect(),
            signs: vec![0; stride],
        };
        state.normalize();
        Ok(state)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn branch_count(&self) -> usize {
        self.branches
    }

    /// Words per bit column.
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn column(&self, q: QubitId) -> &[u64] {
        let s = q.index() * self.stride;
        &self.cols[s..s + self.stride]
    }

    /// Mask of valid branch bits in the last column word.
    #[inline]
    fn tail_mask(&self) -> u64 {
        match self.branches % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    #[inline]
    pub fn bit(&self, branch: usize, q: QubitId) -> bool {
        (self.cols[q.index() * self.stride + branch / 64] >> (branch % 64)) & 1 == 1
    }

    /// Signed amplitude of branch `i`.
    #[inline]
    pub fn amplitude(&self, i: usize) -> Amplitude {
        if (self.signs[i / 64] >> (i % 64)) & 1 == 1 {
            -self.amps[i]
        } else {
            self.amps[i]
        }
    }

    pub fn word(&self, i: usize) -> BasisWord {
        let mut w = BasisWord::zeros(self.qubits);
        for q in 0..self.qubits {
            w.set(q, self.bit(i, QubitId::new(q)));
        }
        w
    }

    pub fn branches(&self) -> impl Iterator<Item = (BasisWord, Amplitude)> + '_ {
        (0..self.branches).map(move |i| (self.word(i), self.amplitude(i)))
    }

    /// Amplitude of a given basis word, zero if absent.
    pub fn amplitude_of(&self, word: &BasisWord) -> Amplitude {
        (0..self.branches)
            .find(|&i| (0..self.qubits).all(|q| self.bit(i, QubitId::new(q)) == word.get(q)))
            .map_or(Amplitude::new(0.0, 0.0), |i| self.amplitude(i))
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescales to unit norm and prunes negligible branches.
    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm == 0.0 {
            return;
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        if self.amps.iter().any(|a| a.norm_sqr() < PRUNE_THRESHOLD) {
            let keep: Vec<usize> = (0..self.branches).filter(|&i| self.amps[i].norm_sqr() >= PRUNE_THRESHOLD).collect();
            self.retain(&keep);
        }
    }

    fn retain(&mut self, keep: &[usize]) {
        let branches = keep.len();
        let stride = branches.div_ceil(64);
        let mut cols = vec![0u64; self.qubits * stride];
        let mut signs = vec![0u64; stride];
        for (j, &i) in keep.iter().enumerate() {
            for q in 0..self.qubits {
                if self.bit(i, QubitId::new(q)) {
                    cols[q * stride + j / 64] |= 1 << (j % 64);
                }
            }
            if (self.signs[i / 64] >> (i % 64)) & 1 == 1 {
                signs[j / 64] |= 1 << (j % 64);
            }
        }
        self.amps = keep.iter().map(|&i| self.amps[i]).collect();
        self.branches = branches;
        self.stride = stride;
        self.cols = cols;
        self.signs = signs;
    }

    fn check(&self, q: QubitId) -> Result<(), BranchError> {
        if q.index() >= self.qubits {
            Err(BranchError::OutOfRange { qubit: q.index(), width: self.qubits })
        } else {
            Ok(())
        }
    }

    pub fn apply_swap(&mut self, a: QubitId, b: QubitId) -> Result<(), BranchError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(BranchError::Overlap);
        }
        self.swap_unchecked(a, b);
        Ok(())
    }

    pub fn apply_cswap(&mut self, controls: &[Control], a: QubitId, b: QubitId) -> Result<(), BranchError> {
        if controls.is_empty() || controls.len() > 2 {
            return Err(BranchError::ControlCount(controls.len()));
        }
        let mut ops: Vec<QubitId> = controls.iter().map(|c| c.qubit).collect();
        ops.push(a);
        ops.push(b);
        for &q in &ops {
            self.check(q)?;
        }
        let distinct: HashSet<_> = ops.iter().collect();
        if distinct.len() != ops.len() {
            return Err(BranchError::Overlap);
        }
        self.cswap_unchecked(controls, a, b);
        Ok(())
    }

    pub fn apply_x(&mut self, q: QubitId) -> Result<(), BranchError> {
        self.check(q)?;
        self.x_unchecked(q);
        Ok(())
    }

    pub fn apply_z(&mut self, q: QubitId) -> Result<(), BranchError> {
        self.check(q)?;
        self.z_unchecked(q);
        Ok(())
    }

    /// X on `target` when the classical `data_bit` is set.
    pub fn apply_classical_cx(&mut self, data_bit: bool, target: QubitId) -> Result<(), BranchError> {
        self.check(target)?;
        if data_bit {
            self.x_unchecked(target);
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_unchecked(&mut self, a: QubitId, b: QubitId) {
        let (sa, sb) = (a.index() * self.stride, b.index() * self.stride);
        for w in 0..self.stride {
            let d = self.cols[sa + w] ^ self.cols[sb + w];
            self.cols[sa + w] ^= d;
            self.cols[sb + w] ^= d;
        }
    }

    #[inline]
    pub(crate) fn cswap_unchecked(&mut self, controls: &[Control], a: QubitId, b: QubitId) {
        let (sa, sb) = (a.index() * self.stride, b.index() * self.stride);
        for w in 0..self.stride {
            let mut m = u64::MAX;
            for c in controls {
                let col = self.cols[c.qubit.index() * self.stride + w];
                m &= if c.polarity { col } else { !col };
            }
            let d = (self.cols[sa + w] ^ self.cols[sb + w]) & m;
            self.cols[sa + w] ^= d;
            self.cols[sb + w] ^= d;
        }
    }

    #[inline]
    pub(crate) fn x_unchecked(&mut self, q: QubitId) {
        let s = q.index() * self.stride;
        for w in 0..self.stride {
            self.cols[s + w] = !self.cols[s + w];
        }
        let tail = self.tail_mask();
        self.cols[s + self.stride - 1] &= tail;
    }

    #[inline]
    pub(crate) fn z_unchecked(&mut self, q: QubitId) {
        let s = q.index() * self.stride;
        for w in 0..self.stride {
            self.signs[w] ^= self.cols[s + w];
        }
    }

    /// ⟨self|other⟩.
    pub fn inner_product(&self, other: &BranchState) -> Result<Amplitude, BranchError> {
        if self.qubits != other.qubits {
            return Err(BranchError::WidthMismatch { expected: self.qubits, found: other.qubits });
        }
        let rows_a = self.rows();
        // Hash the other state's rows once, then look each of ours up.
        let rows_b = other.rows();
        let words = self.qubits.div_ceil(64);
        let mut lookup: HashMap<&[u64], usize> = HashMap::with_capacity(other.branches);
        for j in 0..other.branches {
            lookup.insert(&rows_b[j * words..(j + 1) * words], j);
        }
        let mut acc = Amplitude::new(0.0, 0.0);
        for i in 0..self.branches {
            if let Some(&j) = lookup.get(&rows_a[i * words..(i + 1) * words]) {
                acc += self.amplitude(i).conj() * other.amplitude(j);
            }
        }
        Ok(acc)
    }

    /// Row-major copy of all basis words, `ceil(qubits/64)` words per branch.
    fn rows(&self) -> Vec<u64> {
        let words = self.qubits.div_ceil(64);
        let mut rows = vec![0u64; words * self.branches];
        for q in 0..self.qubits {
            let col = &self.cols[q * self.stride..(q + 1) * self.stride];
            for (w, &bits) in col.iter().enumerate() {
                let mut b = bits;
                while b != 0 {
                    let t = b.trailing_zeros() as usize;
                    b &= b - 1;
                    let i = w * 64 + t;
                    rows[i * words + q / 64] |= 1 << (q % 64);
                }
            }
        }
        rows
    }
}
