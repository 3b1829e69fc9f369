use super::{PackedBitMatrix, WORD_BITS};
use crate::{Error, Result};

/// Side of the square tiles the transpose walks, in bits.
const TILE_BITS: usize = 128;
const BLOCKS_PER_TILE: usize = TILE_BITS / WORD_BITS;

/// In-place transpose of a 32x32 bit block, LSB-first: on return bit `c` of
/// `a[r]` holds what was bit `r` of `a[c]`.
///
/// Recursive block swap: at step `j` the off-diagonal `j x j` sub-blocks of
/// every `2j x 2j` block are exchanged.
#[inline]
pub(crate) fn transpose32(a: &mut [u32; 32]) {
    let mut j = 16usize;
    let mut m: u32 = 0x0000_FFFF;
    while j != 0 {
        let mut k = 0usize;
        while k < 32 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k] ^= t << j;
            a[k + j] ^= t;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Exact bit-matrix transpose: bit `(i, j)` of `m` becomes bit `(j, i)` of the
/// result, which has `m.dim()` rows of `m.rows()` bits.
///
/// Walks the input in 128x128-bit tiles, each made of 4x4 word blocks that are
/// transposed in registers.
///
/// Fails on a matrix with zero rows, whose transpose would have zero-width rows.
pub fn transpose(m: &PackedBitMatrix) -> Result<PackedBitMatrix> {
    if m.rows() == 0 {
        return Err(Error::EmptyInput("cannot transpose a matrix with no rows".into()));
    }
    let (rows, dim) = (m.rows(), m.dim());
    let src_wpr = m.words_per_row();
    let mut out = PackedBitMatrix::zeros(dim, rows);
    let dst_wpr = out.words_per_row();
    let src = m.words();
    let row_blocks = rows.div_ceil(WORD_BITS);

    let mut block = [0u32; 32];
    for tile_r in (0..row_blocks).step_by(BLOCKS_PER_TILE) {
        for tile_c in (0..src_wpr).step_by(BLOCKS_PER_TILE) {
            for rb in tile_r..(tile_r + BLOCKS_PER_TILE).min(row_blocks) {
                let r0 = rb * WORD_BITS;
                let height = (rows - r0).min(WORD_BITS);
                for wc in tile_c..(tile_c + BLOCKS_PER_TILE).min(src_wpr) {
                    for (t, slot) in block.iter_mut().enumerate() {
                        *slot = if t < height { src[(r0 + t) * src_wpr + wc] } else { 0 };
                    }
                    transpose32(&mut block);
                    let c0 = wc * WORD_BITS;
                    let width = (dim - c0).min(WORD_BITS);
                    let dst = out.words_mut();
                    for (t, &w) in block.iter().take(width).enumerate() {
                        dst[(c0 + t) * dst_wpr + rb] = w;
                    }
                }
            }
        }
    }
    debug_assert!(out.padding_is_clear());
    Ok(out)
}
