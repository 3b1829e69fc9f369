//! Seeded generation of ID and Value hypervectors.

use crate::hypervector::{last_word_mask, PackedBitMatrix};
use crate::seed;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::RngCore;

fn fill_random(rng: &mut impl RngCore, row: &mut [u32], dim: usize) {
    for w in row.iter_mut() {
        *w = rng.next_u32();
    }
    if let Some(last) = row.last_mut() {
        *last &= last_word_mask(dim);
    }
}

/// `count` independent uniformly random hypervectors.
pub fn generate_random(count: usize, dim: usize, seed: u64) -> Result<PackedBitMatrix> {
    if count == 0 || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "random hypervectors need count >= 1 and dim >= 1, got {count}x{dim}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut m = PackedBitMatrix::zeros(count, dim);
    for r in 0..count {
        fill_random(&mut rng, m.row_words_mut(r), dim);
    }
    Ok(m)
}

/// Linearly scaled level vectors: `V_0` is random and each next level flips
/// `floor(dim / (2 (bins - 1)))` positions never flipped before, so that
/// `hamming(V_0, V_k) = k * floor(dim / (2 (bins - 1)))`.
pub fn generate_scale_random(bins: usize, dim: usize, seed: u64) -> Result<PackedBitMatrix> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("bin count must be >= 2, got {bins}")));
    }
    let quota = dim / (2 * (bins - 1));
    if quota == 0 {
        return Err(Error::InvalidParameter(format!(
            "{bins} levels need at least {} bits, dim is {dim}",
            2 * (bins - 1)
        )));
    }
    let mut rng = seed::rng(seed);
    let mut m = PackedBitMatrix::zeros(bins, dim);
    fill_random(&mut rng, m.row_words_mut(0), dim);
    let mut order: Vec<usize> = (0..dim).collect();
    order.shuffle(&mut rng);
    for k in 1..bins {
        let prev = m.row_words(k - 1).to_vec();
        let row = m.row_words_mut(k);
        row.copy_from_slice(&prev);
        for &pos in &order[(k - 1) * quota..k * quota] {
            row[pos / 32] ^= 1 << (pos % 32);
        }
    }
    Ok(m)
}

/// Sandwich level vectors: even levels are random, odd level `2i + 1` takes
/// its lower `dim / 2` bits from level `2i` and its upper bits from level
/// `2i + 2` (random when that level does not exist).
pub fn generate_sandwich(bins: usize, dim: usize, seed: u64) -> Result<PackedBitMatrix> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("bin count must be >= 2, got {bins}")));
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "sandwich generation needs an even dim, got {dim}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut m = PackedBitMatrix::zeros(bins, dim);
    for k in (0..bins).step_by(2) {
        fill_random(&mut rng, m.row_words_mut(k), dim);
    }
    let half = dim / 2;
    let mut upper_source = PackedBitMatrix::zeros(1, dim);
    for k in (1..bins).step_by(2) {
        let upper = if k + 1 < bins {
            m.row(k + 1)
        } else {
            fill_random(&mut rng, upper_source.row_words_mut(0), dim);
            upper_source.row(0)
        };
        let lower = m.row(k - 1);
        let bits: Vec<bool> = (0..dim)
            .map(|j| if j < half { lower.get(j) } else { upper.get(j) })
            .collect();
        for (j, b) in bits.into_iter().enumerate() {
            m.set(k, j, b);
        }
    }
    Ok(m)
}
