use crate::hypervector::{popcount, xor_popcount, BitRow, WORD_BITS};
use crate::{Error, Result};

/// Normalized Hamming distance `popcount(a xor b) / D`, in `[0, 1]`.
pub fn hamming_distance(a: BitRow<'_>, b: BitRow<'_>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(xor_popcount(a.words(), b.words()) as f64 / a.dim() as f64)
}

/// Cosine similarity between a real-valued accumulator row and a binary row
/// (read as a 0/1 vector).
pub fn cosine_similarity(a: &[f64], b: BitRow<'_>) -> Result<f64> {
    if a.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.dim(),
        });
    }
    let norm_a = l2_norm(a);
    let ones = popcount(b.words());
    if norm_a == 0.0 || ones == 0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(cosine_from_parts(sparse_dot(a, b.words()), norm_a, ones))
}

#[inline]
pub(crate) fn l2_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `sum_j a[j]` over set bits `j` of `words`, accumulated in ascending `j`.
#[inline]
pub(crate) fn sparse_dot(a: &[f64], words: &[u32]) -> f64 {
    let mut dot = 0.0;
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let j = wi * WORD_BITS + w.trailing_zeros() as usize;
            dot += a[j];
            w &= w - 1;
        }
    }
    dot
}

#[inline]
pub(crate) fn cosine_from_parts(dot: f64, norm_a: f64, ones: u32) -> f64 {
    dot / (norm_a * (ones as f64).sqrt())
}
