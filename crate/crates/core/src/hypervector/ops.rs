use super::{last_word_mask, transpose32, BitRow, CountVector, PackedBitMatrix, WORD_BITS};
use crate::{Error, Result};

#[inline]
pub(crate) fn popcount(words: &[u32]) -> u32 {
    words.iter().map(|w| w.count_ones()).sum()
}

#[inline]
pub(crate) fn xor_popcount(a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Bitwise XOR of `a` and `b`. `b` may have a single row, which is then
/// bound against every row of `a`.
pub fn xor_bind(a: &PackedBitMatrix, b: &PackedBitMatrix) -> Result<PackedBitMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let broadcast = b.rows() == 1 && a.rows() != 1;
    if !broadcast && a.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "cannot bind {} rows with {} rows",
            a.rows(),
            b.rows()
        )));
    }
    let mut out = a.clone();
    let wpr = a.words_per_row();
    for r in 0..a.rows() {
        let other = if broadcast { b.row_words(0) } else { b.row_words(r) };
        for (x, y) in out.row_words_mut(r).iter_mut().zip(other) {
            *x ^= y;
        }
    }
    debug_assert_eq!(out.words().len(), a.rows() * wpr);
    Ok(out)
}

/// Rotates `src` (a `dim`-bit row) so that bit `j` moves to `(j + shift) mod dim`.
pub(crate) fn rotate_row_into(src: &[u32], dim: usize, shift: usize, dst: &mut [u32]) {
    let n = src.len();
    let shift = shift % dim;
    if shift == 0 {
        dst.copy_from_slice(src);
        return;
    }
    // left part: bits j -> j + shift (j + shift < dim)
    let (ws, bs) = (shift / WORD_BITS, shift % WORD_BITS);
    for i in 0..n {
        let mut v = 0u32;
        if i >= ws {
            v = src[i - ws] << bs;
            if bs > 0 && i > ws {
                v |= src[i - ws - 1] >> (WORD_BITS - bs);
            }
        }
        dst[i] = v;
    }
    // right part: bits j -> j - (dim - shift) (j >= dim - shift)
    let back = dim - shift;
    let (ws, bs) = (back / WORD_BITS, back % WORD_BITS);
    for i in 0..n {
        let mut v = 0u32;
        if i + ws < n {
            v = src[i + ws] >> bs;
            if bs > 0 && i + ws + 1 < n {
                v |= src[i + ws + 1] << (WORD_BITS - bs);
            }
        }
        dst[i] |= v;
    }
    dst[n - 1] &= last_word_mask(dim);
}

/// Circular rotation of every row by `shift` positions toward higher bit
/// indices, modulo `dim`.
pub fn rotate(m: &PackedBitMatrix, shift: usize) -> PackedBitMatrix {
    let mut out = PackedBitMatrix::zeros(m.rows(), m.dim());
    for r in 0..m.rows() {
        rotate_row_into(m.row_words(r), m.dim(), shift, out.row_words_mut(r));
    }
    out
}

/// Per-row popcount.
pub fn horizontal_sum(m: &PackedBitMatrix) -> CountVector {
    m.iter_rows().map(|r| popcount(r.words())).collect::<Vec<_>>().into()
}

/// Adds per-column bit counts of a packed row stack into `counts`.
///
/// Works on 32-row stripes: each 32x32 block is transposed in registers so
/// that a column of the input becomes a word, which is then popcounted.
pub(crate) fn vertical_sum_words(words: &[u32], rows: usize, dim: usize, counts: &mut [u32]) {
    let wpr = dim.div_ceil(WORD_BITS);
    debug_assert_eq!(words.len(), rows * wpr);
    debug_assert_eq!(counts.len(), dim);
    let mut block = [0u32; 32];
    for r0 in (0..rows).step_by(WORD_BITS) {
        let height = (rows - r0).min(WORD_BITS);
        for wc in 0..wpr {
            for (t, slot) in block.iter_mut().enumerate() {
                *slot = if t < height { words[(r0 + t) * wpr + wc] } else { 0 };
            }
            transpose32(&mut block);
            let base = wc * WORD_BITS;
            let width = (dim - base).min(WORD_BITS);
            for (c, w) in counts[base..base + width].iter_mut().zip(&block) {
                *c += w.count_ones();
            }
        }
    }
}

/// Per-column count of set bits across all rows (length `dim`).
pub fn vertical_sum(m: &PackedBitMatrix) -> CountVector {
    let mut counts = vec![0u32; m.dim()];
    vertical_sum_words(m.words(), m.rows(), m.dim(), &mut counts);
    counts.into()
}

/// Majority threshold against `total` contributions, writing into a packed row.
/// Caller guarantees `counts[j] <= total`.
pub(crate) fn majority_into(counts: &[u32], total: usize, tiebreak: &[u32], out: &mut [u32]) {
    let total = total as u64;
    for (wi, chunk) in counts.chunks(WORD_BITS).enumerate() {
        let tb = tiebreak[wi];
        let mut w = 0u32;
        for (b, &c) in chunk.iter().enumerate() {
            let twice = 2 * c as u64;
            let bit = if twice > total {
                1
            } else if twice < total {
                0
            } else {
                (tb >> b) & 1
            };
            w |= bit << b;
        }
        out[wi] = w;
    }
}

/// Binarizes `counts` by strict majority over `n` contributors; exact ties
/// take the corresponding bit of `tiebreak`.
pub fn majority_binarize(counts: &CountVector, n: usize, tiebreak: BitRow<'_>) -> Result<PackedBitMatrix> {
    if tiebreak.dim() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            got: tiebreak.dim(),
        });
    }
    if let Some((index, &count)) = counts.iter().enumerate().find(|(_, &c)| c as usize > n) {
        return Err(Error::CountExceedsTotal {
            index,
            count,
            total: n,
        });
    }
    let mut out = PackedBitMatrix::zeros(1, tiebreak.dim());
    majority_into(counts, n, tiebreak.words(), out.row_words_mut(0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_bits(len: usize, mut state: u64) -> Vec<u8> {
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) & 1) as u8
            })
            .collect()
    }

    #[test]
    fn xor_self_is_zero_and_zero_is_identity() {
        let a = PackedBitMatrix::pack(3, 70, &lcg_bits(210, 7)).unwrap();
        let z = PackedBitMatrix::zeros(3, 70);
        assert_eq!(xor_bind(&a, &a).unwrap(), z);
        assert_eq!(xor_bind(&a, &z).unwrap(), a);
    }

    #[test]
    fn xor_broadcasts_single_row() {
        let a = PackedBitMatrix::pack(3, 40, &lcg_bits(120, 1)).unwrap();
        let b = PackedBitMatrix::pack(1, 40, &lcg_bits(40, 2)).unwrap();
        let out = xor_bind(&a, &b).unwrap();
        let (ab, bb, ob) = (a.unpack(), b.unpack(), out.unpack());
        for r in 0..3 {
            for c in 0..40 {
                assert_eq!(ob[r * 40 + c], ab[r * 40 + c] ^ bb[c]);
            }
        }
    }

    #[test]
    fn xor_shape_errors() {
        let a = PackedBitMatrix::zeros(3, 40);
        assert!(xor_bind(&a, &PackedBitMatrix::zeros(2, 40)).is_err());
        assert!(xor_bind(&a, &PackedBitMatrix::zeros(3, 41)).is_err());
    }

    #[test]
    fn rotate_single_bit() {
        let mut m = PackedBitMatrix::zeros(1, 8);
        m.set(0, 0, true);
        let r = rotate(&m, 1);
        assert!(r.get(0, 1));
        assert_eq!(r.row(0).count_ones(), 1);
        assert_eq!(rotate(&m, 0), m);
    }

    #[test]
    fn rotate_wraps_high_bit() {
        let mut m = PackedBitMatrix::zeros(1, 33);
        m.set(0, 32, true);
        let r = rotate(&m, 1);
        assert!(r.get(0, 0));
        assert!(r.padding_is_clear());
    }

    #[test]
    fn rotate_inverse() {
        let d = 1000;
        let m = PackedBitMatrix::pack(2, d, &lcg_bits(2 * d, 9)).unwrap();
        assert_eq!(rotate(&rotate(&m, 37), d - 37), m);
        assert_eq!(rotate(&m, d), m);
    }

    #[test]
    fn hsum_extremes() {
        assert_eq!(&*horizontal_sum(&PackedBitMatrix::ones(1, 128)), &[128]);
        assert_eq!(&*horizontal_sum(&PackedBitMatrix::zeros(2, 128)), &[0, 0]);
    }

    #[test]
    fn vsum_identical_rows() {
        let m = PackedBitMatrix::ones(3, 64);
        assert!(vertical_sum(&m).iter().all(|&c| c == 3));
        let empty = PackedBitMatrix::zeros(0, 64);
        assert_eq!(vertical_sum(&empty).len(), 64);
        assert!(vertical_sum(&empty).iter().all(|&c| c == 0));
    }

    #[test]
    fn majority_strict() {
        let tb = PackedBitMatrix::zeros(1, 3);
        let out = majority_binarize(&vec![5, 0, 3].into(), 5, tb.row(0)).unwrap();
        assert_eq!(out.unpack(), vec![1, 0, 1]);
    }

    #[test]
    fn majority_ties_follow_tiebreak() {
        let tb = PackedBitMatrix::pack(1, 2, &[1, 0]).unwrap();
        let out = majority_binarize(&vec![2, 2].into(), 4, tb.row(0)).unwrap();
        assert_eq!(out.unpack(), vec![1, 0]);
    }

    #[test]
    fn majority_rejects_count_above_total() {
        let tb = PackedBitMatrix::zeros(1, 2);
        let err = majority_binarize(&vec![1, 6].into(), 5, tb.row(0)).unwrap_err();
        assert!(matches!(err, Error::CountExceedsTotal { index: 1, count: 6, total: 5 }));
        assert!(majority_binarize(&vec![1].into(), 5, tb.row(0)).is_err());
    }
}
