//! Bit-packed hypervector storage and the exact-count kernels over it.
//!
//! Layout: logical bit `j` of a row lives in word `j / 32` at in-word
//! position `j % 32`, least-significant bit first. Rows are stored
//! contiguously, `ceil(D / 32)` words each. Bits at positions `>= D` in the
//! last word of a row ("padding") are always zero; every kernel relies on
//! and preserves this.

mod io;
mod ops;
mod transpose;

pub use io::{read_container, read_dense_csv, write_container, write_dense_csv, CONTAINER_MAGIC};
pub use ops::{horizontal_sum, majority_binarize, rotate, vertical_sum, xor_bind};
pub use transpose::transpose;

pub(crate) use ops::{majority_into, popcount, rotate_row_into, vertical_sum_words, xor_popcount};
pub(crate) use transpose::transpose32;

use crate::{Error, Result};
use std::ops::Deref;

pub const WORD_BITS: usize = 32;

/// Number of 32-bit words needed to hold `dim` bits.
#[inline]
pub const fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `dim`-bit row.
#[inline]
pub(crate) const fn last_word_mask(dim: usize) -> u32 {
    match dim % WORD_BITS {
        0 => u32::MAX,
        r => (1u32 << r) - 1,
    }
}

/// `rows` binary hypervectors of `dim` bits each, packed into `u32` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackedBitMatrix {
    rows: usize,
    dim: usize,
    words_per_row: usize,
    words: Vec<u32>,
}

impl std::fmt::Debug for PackedBitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PackedBitMatrix")
            .field("rows", &self.rows)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl PackedBitMatrix {
    /// All-zero matrix.
    ///
    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(rows: usize, dim: usize) -> Self {
        assert!(dim >= 1, "hypervector dimension must be at least 1");
        let words_per_row = words_for(dim);
        Self {
            rows,
            dim,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    /// All-ones matrix (padding still zero).
    ///
    /// # Panics
    /// If `dim == 0`.
    pub fn ones(rows: usize, dim: usize) -> Self {
        let mut m = Self::zeros(rows, dim);
        m.words.fill(u32::MAX);
        m.clear_padding();
        m
    }

    /// Packs a row-major `rows x dim` matrix of 0/1 bytes.
    pub fn pack(rows: usize, dim: usize, bits: &[u8]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if bits.len() != rows * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot form a {rows}x{dim} matrix",
                bits.len()
            )));
        }
        let mut m = Self::zeros(rows, dim);
        for (r, src) in bits.chunks_exact(dim).enumerate() {
            let dst = m.row_words_mut(r);
            for (c, &b) in src.iter().enumerate() {
                match b {
                    0 => {}
                    1 => dst[c / WORD_BITS] |= 1 << (c % WORD_BITS),
                    value => return Err(Error::NonBinary { row: r, col: c, value }),
                }
            }
        }
        Ok(m)
    }

    /// Row-major 0/1 bytes, the exact inverse of [`PackedBitMatrix::pack`].
    pub fn unpack(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows * self.dim);
        for r in 0..self.rows {
            let row = self.row_words(r);
            out.extend((0..self.dim).map(|c| ((row[c / WORD_BITS] >> (c % WORD_BITS)) & 1) as u8));
        }
        out
    }

    /// Wraps raw words, checking length and that padding bits are clear.
    pub fn from_words(rows: usize, dim: usize, words: Vec<u32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        let words_per_row = words_for(dim);
        if words.len() != rows * words_per_row {
            return Err(Error::ShapeMismatch(format!(
                "expected {} words for {rows}x{dim}, got {}",
                rows * words_per_row,
                words.len()
            )));
        }
        let m = Self {
            rows,
            dim,
            words_per_row,
            words,
        };
        let mask = last_word_mask(dim);
        for r in 0..rows {
            if m.row_words(r)[words_per_row - 1] & !mask != 0 {
                return Err(Error::Format(format!("row {r} has nonzero padding bits")));
            }
        }
        Ok(m)
    }

    /// Stacks rows of equal dimension.
    pub fn from_rows<'a, I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitRow<'a>>,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        let mut words = Vec::new();
        let mut count = 0;
        for row in rows {
            if row.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.dim,
                });
            }
            words.extend_from_slice(row.words);
            count += 1;
        }
        Ok(Self {
            rows: count,
            dim,
            words_per_row: words_for(dim),
            words,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn into_words(self) -> Vec<u32> {
        self.words
    }

    /// Bytes occupied by the packed words: `rows * ceil(dim / 32) * 4`.
    pub fn storage_bytes(&self) -> usize {
        std::mem::size_of_val(self.words.as_slice())
    }

    #[inline]
    pub fn row(&self, r: usize) -> BitRow<'_> {
        BitRow {
            words: self.row_words(r),
            dim: self.dim,
        }
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = BitRow<'_>> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u32] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Callers must keep padding bits zero.
    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u32] {
        &mut self.words
    }

    /// Callers must keep padding bits zero.
    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.dim, "bit ({r}, {c}) out of bounds");
        (self.words[r * self.words_per_row + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.dim, "bit ({r}, {c}) out of bounds");
        let w = &mut self.words[r * self.words_per_row + c / WORD_BITS];
        let bit = 1u32 << (c % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    /// Copies the given rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut words = Vec::with_capacity(indices.len() * self.words_per_row);
        for &i in indices {
            words.extend_from_slice(self.row_words(i));
        }
        Self {
            rows: indices.len(),
            dim: self.dim,
            words_per_row: self.words_per_row,
            words,
        }
    }

    /// Copies the contiguous row range `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows, "row range {start}..{end} out of bounds");
        Self {
            rows: end - start,
            dim: self.dim,
            words_per_row: self.words_per_row,
            words: self.words[start * self.words_per_row..end * self.words_per_row].to_vec(),
        }
    }

    /// True when every padding bit is zero. Always holds for values built
    /// through this API; exposed for tests that inspect raw words.
    pub fn padding_is_clear(&self) -> bool {
        let mask = last_word_mask(self.dim);
        (0..self.rows).all(|r| self.row_words(r)[self.words_per_row - 1] & !mask == 0)
    }

    pub(crate) fn clear_padding(&mut self) {
        let mask = last_word_mask(self.dim);
        let wpr = self.words_per_row;
        for r in 0..self.rows {
            self.words[r * wpr + wpr - 1] &= mask;
        }
    }
}

/// Borrowed view of one packed row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitRow<'a> {
    words: &'a [u32],
    dim: usize,
}

impl<'a> BitRow<'a> {
    /// `words` must hold exactly `ceil(dim / 32)` words with clear padding.
    pub fn new(words: &'a [u32], dim: usize) -> Result<Self> {
        if dim == 0 || words.len() != words_for(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} words cannot hold a {dim}-bit row",
                words.len()
            )));
        }
        if words[words.len() - 1] & !last_word_mask(dim) != 0 {
            return Err(Error::Format("row has nonzero padding bits".into()));
        }
        Ok(Self { words, dim })
    }

    #[inline]
    pub fn words(&self) -> &'a [u32] {
        self.words
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, c: usize) -> bool {
        assert!(c < self.dim);
        (self.words[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        popcount(self.words)
    }

    pub fn to_matrix(&self) -> PackedBitMatrix {
        PackedBitMatrix {
            rows: 1,
            dim: self.dim,
            words_per_row: self.words.len(),
            words: self.words.to_vec(),
        }
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + 'a {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + t)
            })
        })
    }
}

/// Exact non-negative counts produced by the summation kernels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountVector(Vec<u32>);

impl CountVector {
    pub fn new(values: Vec<u32>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl Deref for CountVector {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for CountVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}
