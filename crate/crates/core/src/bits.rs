//! GF(2) vectors and matrices.
//!
//! Words are stored packed, 64 bits per machine word, with an explicit
//! logical length. Bits past the logical length are always zero so that
//! equality, hashing and weight can work on whole words.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

const WORD_BITS: usize = 64;

type Words = SmallVec<[u64; 4]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is rank deficient: no pivot available for row {row}")]
    RankDeficient { row: usize },
    #[error("matrix is not systematic: leading block differs from identity at column {col}")]
    NotSystematic { col: usize },
    #[error("invalid bit value {value} at position {position}")]
    InvalidBit { position: usize, value: u8 },
    #[error("rows have inconsistent lengths: row {row} has {actual} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        actual: usize,
    },
}

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    words: Words,
    len: usize,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: SmallVec::from_elem(0, word_count(len)),
            len,
        }
    }

    /// Builds a word from 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self, BitError> {
        let mut w = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => w.set(i, true),
                value => return Err(BitError::InvalidBit { position: i, value }),
            }
        }
        Ok(w)
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut w = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                w.set(i, true);
            }
        }
        w
    }

    /// Builds a word from packed 64-bit limbs, bit `i` at bit `i % 64` of
    /// limb `i / 64`. Bits beyond `len` are dropped.
    pub fn from_words(words: &[u64], len: usize) -> Self {
        let mut w = Self::zeros(len);
        for (dst, src) in w.words.iter_mut().zip(words) {
            *dst = *src;
        }
        w.clear_tail();
        w
    }

    /// Word of length `len` with ones at the given positions.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut w = Self::zeros(len);
        for &i in support {
            w.set(i, true);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR. Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitWord) {
        assert_eq!(self.len, other.len, "xor of words with different lengths");
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitWord) -> BitWord {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn distance(&self, other: &BitWord) -> usize {
        assert_eq!(
            self.len, other.len,
            "distance of words with different lengths"
        );
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Inner product over GF(2).
    #[inline]
    pub fn dot(&self, other: &BitWord) -> bool {
        assert_eq!(
            self.len, other.len,
            "dot product of words with different lengths"
        );
        let ones: u32 = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the one bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// The first `len` bits.
    pub fn prefix(&self, len: usize) -> BitWord {
        assert!(len <= self.len);
        let mut out = BitWord {
            words: self.words[..word_count(len)].iter().copied().collect(),
            len,
        };
        out.clear_tail();
        out
    }

    /// Bits `start..start+len`.
    pub fn slice(&self, start: usize, len: usize) -> BitWord {
        assert!(start + len <= self.len);
        BitWord::from_bools((start..start + len).map(|i| self.get(i)))
    }

    /// Gathers `out[i] = self[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> BitWord {
        assert_eq!(perm.len(), self.len);
        let mut out = BitWord::zeros(self.len);
        for (i, &p) in perm.iter().enumerate() {
            if self.get(p) {
                out.set(i, true);
            }
        }
        out
    }

    /// Scatters `out[perm[i]] = self[i]`, the inverse of [`BitWord::permuted`].
    pub fn unpermuted(&self, perm: &[usize]) -> BitWord {
        assert_eq!(perm.len(), self.len);
        let mut out = BitWord::zeros(self.len);
        for (i, &p) in perm.iter().enumerate() {
            if self.get(i) {
                out.set(p, true);
            }
        }
        out
    }

    /// Packs the word into an integer, bit `i` of the word at bit `i` of the result.
    /// Only valid for words of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD_BITS, "word too long to pack into u64");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS);
        let mut w = Self::zeros(len);
        if len > 0 {
            w.words[0] = value;
            w.clear_tail();
        }
        w
    }

    /// Lexicographic order reading from position 0, with 0 < 1.
    pub fn lex_cmp(&self, other: &BitWord) -> Ordering {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            let diff = a ^ b;
            if diff != 0 {
                let first = diff.trailing_zeros();
                return if (a >> first) & 1 == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        Ordering::Equal
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense binary matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitWord>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitWord::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitWord>, cols: usize) -> Result<Self, BitError> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(BitError::RaggedRows {
                    row: i,
                    expected: cols,
                    actual: r.len(),
                });
            }
        }
        Ok(Self { rows, cols })
    }

    /// Builds a matrix from nested 0/1 rows.
    pub fn from_bit_rows(rows: &[Vec<u8>]) -> Result<Self, BitError> {
        let cols = rows.first().map_or(0, Vec::len);
        let words = rows
            .iter()
            .map(|r| BitWord::from_bits(r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(words, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitWord {
        &self.rows[i]
    }

    pub fn row_words(&self) -> &[BitWord] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn column(&self, c: usize) -> BitWord {
        BitWord::from_bools(self.rows.iter().map(|r| r.get(c)))
    }

    pub fn transpose(&self) -> BitMatrix {
        let rows = (0..self.cols).map(|c| self.column(c)).collect();
        BitMatrix {
            rows,
            cols: self.rows.len(),
        }
    }

    /// Row vector times matrix: XOR of the rows selected by `v`.
    pub fn left_mul(&self, v: &BitWord) -> Result<BitWord, BitError> {
        if v.len() != self.rows.len() {
            return Err(BitError::DimensionMismatch {
                expected: self.rows.len(),
                actual: v.len(),
            });
        }
        let mut out = BitWord::zeros(self.cols);
        for i in v.ones() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// Applies a column permutation: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> BitMatrix {
        BitMatrix {
            rows: self.rows.iter().map(|r| r.permuted(perm)).collect(),
            cols: self.cols,
        }
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows.len() {
                break;
            }
            if let Some(p) = (rank..m.rows.len()).find(|&r| m.rows[r].get(c)) {
                m.rows.swap(rank, p);
                let pivot = m.rows[rank].clone();
                for r in 0..m.rows.len() {
                    if r != rank && m.rows[r].get(c) {
                        m.rows[r].xor_assign(&pivot);
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// `v · Hᵀ` over GF(2). The result has one bit per row of `h`.
pub fn syndrome(h: &BitMatrix, v: &BitWord) -> Result<BitWord, BitError> {
    if v.len() != h.cols() {
        return Err(BitError::DimensionMismatch {
            expected: h.cols(),
            actual: v.len(),
        });
    }
    Ok(BitWord::from_bools(
        h.row_words().iter().map(|row| row.dot(v)),
    ))
}

/// Reduces a full-rank generator to `[I_k | P]`.
///
/// Pivots are taken on the leftmost independent columns. The returned
/// permutation lists, for each column of the systematic matrix, the column of
/// the input it came from: pivot columns first, then the rest in order.
pub fn to_systematic(g: &BitMatrix) -> Result<(BitMatrix, Vec<usize>), BitError> {
    let k = g.rows();
    let n = g.cols();
    let mut m = g.clone();
    let mut pivots = Vec::with_capacity(k);
    let mut col = 0;
    for row in 0..k {
        let found = loop {
            if col == n {
                break None;
            }
            if let Some(p) = (row..k).find(|&r| m.rows[r].get(col)) {
                break Some(p);
            }
            col += 1;
        };
        let Some(p) = found else {
            return Err(BitError::RankDeficient { row });
        };
        m.rows.swap(row, p);
        let pivot = m.rows[row].clone();
        for r in 0..k {
            if r != row && m.rows[r].get(col) {
                m.rows[r].xor_assign(&pivot);
            }
        }
        pivots.push(col);
        col += 1;
    }
    let mut perm = pivots.clone();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    perm.extend((0..n).filter(|&c| !is_pivot[c]));
    Ok((m.permute_columns(&perm), perm))
}

/// `H = [Pᵀ | I_{n-k}]` for `G = [I_k | P]`.
pub fn parity_from_systematic(g_sys: &BitMatrix) -> Result<BitMatrix, BitError> {
    let k = g_sys.rows();
    let n = g_sys.cols();
    if k > n {
        return Err(BitError::NotSystematic { col: n });
    }
    for i in 0..k {
        for j in 0..k {
            if g_sys.get(i, j) != (i == j) {
                return Err(BitError::NotSystematic { col: j });
            }
        }
    }
    let r = n - k;
    let mut h = BitMatrix::zeros(r, n);
    for i in 0..r {
        for j in 0..k {
            if g_sys.get(j, k + i) {
                h.set(i, j, true);
            }
        }
        h.set(i, k + i, true);
    }
    Ok(h)
}
