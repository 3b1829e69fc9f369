//! Discretization, codebook generation, and hypervector encoding.
//!
//! A datapoint with `F` features is first discretized to `F` bin indices,
//! then encoded against a [`Codebook`] of `F` ID vectors and `B` Value
//! vectors. The default ID-Level binding computes, per bit position,
//!
//! ```text
//! H = majority_f( ID_f xor V_{bin(f)} )
//! ```
//!
//! with exact ties resolved by a fixed tiebreak vector.

mod discretizer;
mod generate;

pub use discretizer::Discretizer;
pub use generate::{generate_random, generate_sandwich, generate_scale_random};

use crate::hypervector::{
    majority_into, read_container, rotate_row_into, vertical_sum_words, write_container, BitRow,
    PackedBitMatrix, WORD_BITS,
};
use crate::seed::{sub_seed, tags};
use crate::{Error, Result};
use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

/// How Value (level) vectors are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationStrategy {
    Random,
    ScaleRandom,
    Sandwich,
}

/// How per-feature information is combined into one hypervector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingStrategy {
    /// `majority_f(ID_f xor V_{x_f})`
    IdLevel,
    /// `majority_f(rotate(V_{x_f}, f))`
    Permutation,
    /// Segment `f` of length `floor(D / F)` holds the head of `V_{x_f}`.
    Appending,
}

impl GenerationStrategy {
    pub const fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::ScaleRandom => "scale_random",
            Self::Sandwich => "sandwich",
        }
    }
}

impl BindingStrategy {
    pub const fn name(self) -> &'static str {
        match self {
            Self::IdLevel => "id_level",
            Self::Permutation => "permutation",
            Self::Appending => "appending",
        }
    }
}

impl fmt::Display for GenerationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BindingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenerationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random" => Ok(Self::Random),
            "scale_random" => Ok(Self::ScaleRandom),
            "sandwich" => Ok(Self::Sandwich),
            _ => Err(Error::InvalidParameter(format!(
                "unknown generation strategy '{s}' (expected random, scale_random, sandwich)"
            ))),
        }
    }
}

impl FromStr for BindingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "id_level" | "idlevel" => Ok(Self::IdLevel),
            "permutation" => Ok(Self::Permutation),
            "appending" => Ok(Self::Appending),
            _ => Err(Error::InvalidParameter(format!(
                "unknown binding strategy '{s}' (expected id_level, permutation, appending)"
            ))),
        }
    }
}

/// ID and Value hypervectors plus the strategy that combines them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    id_vectors: PackedBitMatrix,
    value_vectors: PackedBitMatrix,
    generation: GenerationStrategy,
    binding: BindingStrategy,
    seed: u64,
}

/// JSON header stored in front of a serialized codebook.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookHeader {
    pub generation: GenerationStrategy,
    pub binding: BindingStrategy,
    pub seed: u64,
    pub features: usize,
    pub bins: usize,
    pub dim: usize,
}

const CODEBOOK_MAGIC: &[u8; 4] = b"HVCB";
const CODEBOOK_VERSION: u16 = 1;

impl Codebook {
    /// Regenerates bit-identically from the same arguments.
    pub fn generate(
        features: usize,
        bins: usize,
        dim: usize,
        generation: GenerationStrategy,
        binding: BindingStrategy,
        seed: u64,
    ) -> Result<Self> {
        if features == 0 {
            return Err(Error::InvalidParameter("feature count must be >= 1".into()));
        }
        if bins < 2 {
            return Err(Error::InvalidParameter(format!("bin count must be >= 2, got {bins}")));
        }
        if binding == BindingStrategy::Appending && dim < features {
            return Err(Error::InvalidParameter(format!(
                "appending {features} features needs dim >= {features}, got {dim}"
            )));
        }
        let id_vectors = generate_random(features, dim, sub_seed(seed, tags::ID_VECTORS))?;
        let value_seed = sub_seed(seed, tags::VALUE_VECTORS);
        let value_vectors = match generation {
            GenerationStrategy::Random => generate_random(bins, dim, value_seed)?,
            GenerationStrategy::ScaleRandom => generate_scale_random(bins, dim, value_seed)?,
            GenerationStrategy::Sandwich => generate_sandwich(bins, dim, value_seed)?,
        };
        Ok(Self {
            id_vectors,
            value_vectors,
            generation,
            binding,
            seed,
        })
    }

    /// Assembles a codebook from explicit vectors.
    pub fn from_parts(
        id_vectors: PackedBitMatrix,
        value_vectors: PackedBitMatrix,
        generation: GenerationStrategy,
        binding: BindingStrategy,
        seed: u64,
    ) -> Result<Self> {
        if id_vectors.dim() != value_vectors.dim() {
            return Err(Error::DimensionMismatch {
                expected: id_vectors.dim(),
                got: value_vectors.dim(),
            });
        }
        if id_vectors.rows() == 0 || value_vectors.rows() < 2 {
            return Err(Error::InvalidParameter(
                "codebook needs >= 1 ID vector and >= 2 Value vectors".into(),
            ));
        }
        if binding == BindingStrategy::Appending && id_vectors.dim() < id_vectors.rows() {
            return Err(Error::InvalidParameter("appending needs dim >= feature count".into()));
        }
        Ok(Self {
            id_vectors,
            value_vectors,
            generation,
            binding,
            seed,
        })
    }

    pub fn id_vectors(&self) -> &PackedBitMatrix {
        &self.id_vectors
    }

    pub fn value_vectors(&self) -> &PackedBitMatrix {
        &self.value_vectors
    }

    pub fn generation(&self) -> GenerationStrategy {
        self.generation
    }

    pub fn binding(&self) -> BindingStrategy {
        self.binding
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn feature_count(&self) -> usize {
        self.id_vectors.rows()
    }

    pub fn bins(&self) -> usize {
        self.value_vectors.rows()
    }

    pub fn dim(&self) -> usize {
        self.id_vectors.dim()
    }

    /// The tiebreak row this codebook's seed designates for encoding.
    pub fn tiebreak(&self) -> PackedBitMatrix {
        generate_random(1, self.dim(), sub_seed(self.seed, tags::ENCODE_TIEBREAK))
            .expect("dim >= 1 by construction")
    }

    pub fn header(&self) -> CodebookHeader {
        CodebookHeader {
            generation: self.generation,
            binding: self.binding,
            seed: self.seed,
            features: self.feature_count(),
            bins: self.bins(),
            dim: self.dim(),
        }
    }

    fn check_tiebreak(&self, tiebreak: BitRow<'_>) -> Result<()> {
        if tiebreak.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: tiebreak.dim(),
            });
        }
        Ok(())
    }

    fn check_bins(&self, bins: &[usize]) -> Result<()> {
        if bins.len() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: bins.len(),
            });
        }
        if let Some((f, &b)) = bins.iter().enumerate().find(|(_, &b)| b >= self.bins()) {
            return Err(Error::InvalidParameter(format!(
                "feature {f}: bin index {b} out of range for {} bins",
                self.bins()
            )));
        }
        Ok(())
    }

    /// Encodes one datapoint given as per-feature bin indices.
    pub fn encode(&self, bins: &[usize], tiebreak: BitRow<'_>) -> Result<PackedBitMatrix> {
        self.check_tiebreak(tiebreak)?;
        self.check_bins(bins)?;
        let mut out = PackedBitMatrix::zeros(1, self.dim());
        let mut scratch = Scratch::new(self);
        self.encode_into(bins, tiebreak.words(), out.row_words_mut(0), &mut scratch);
        Ok(out)
    }

    /// Encodes every row of a bin-index matrix; row `i` of the result equals
    /// `encode(bins.row(i))`.
    pub fn encode_batch(&self, bins: ArrayView2<'_, usize>, tiebreak: BitRow<'_>) -> Result<PackedBitMatrix> {
        self.check_tiebreak(tiebreak)?;
        if bins.ncols() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: bins.ncols(),
            });
        }
        for row in bins.rows() {
            let row: Vec<usize> = row.to_vec();
            self.check_bins(&row)?;
        }
        let mut out = PackedBitMatrix::zeros(bins.nrows(), self.dim());
        let wpr = out.words_per_row();
        out.words_mut()
            .par_chunks_mut(wpr)
            .enumerate()
            .for_each_init(
                || (Scratch::new(self), Vec::with_capacity(self.feature_count())),
                |(scratch, row), (i, dst)| {
                    row.clear();
                    row.extend(bins.row(i).iter().copied());
                    self.encode_into(row, tiebreak.words(), dst, scratch);
                },
            );
        Ok(out)
    }

    fn encode_into(&self, bins: &[usize], tiebreak: &[u32], out: &mut [u32], scratch: &mut Scratch) {
        let dim = self.dim();
        let wpr = self.id_vectors.words_per_row();
        let features = bins.len();
        match self.binding {
            BindingStrategy::IdLevel | BindingStrategy::Permutation => {
                for (f, &b) in bins.iter().enumerate() {
                    let dst = &mut scratch.rows[f * wpr..(f + 1) * wpr];
                    let value = self.value_vectors.row_words(b);
                    if self.binding == BindingStrategy::IdLevel {
                        let id = self.id_vectors.row_words(f);
                        for ((d, i), v) in dst.iter_mut().zip(id).zip(value) {
                            *d = i ^ v;
                        }
                    } else {
                        rotate_row_into(value, dim, f, dst);
                    }
                }
                scratch.counts.fill(0);
                vertical_sum_words(&scratch.rows, features, dim, &mut scratch.counts);
                majority_into(&scratch.counts, features, tiebreak, out);
            }
            BindingStrategy::Appending => {
                out.fill(0);
                let segment = dim / features;
                for (f, &b) in bins.iter().enumerate() {
                    copy_bit_prefix(self.value_vectors.row_words(b), segment, out, f * segment);
                }
            }
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&self.header())?;
        w.write_all(CODEBOOK_MAGIC)?;
        w.write_all(&CODEBOOK_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        write_container(&self.id_vectors, &mut w)?;
        write_container(&self.value_vectors, &mut w)?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let header: CodebookHeader = read_json_header(&mut r, CODEBOOK_MAGIC, CODEBOOK_VERSION)?;
        let id_vectors = read_container(&mut r)?;
        let value_vectors = read_container(&mut r)?;
        if id_vectors.rows() != header.features
            || value_vectors.rows() != header.bins
            || id_vectors.dim() != header.dim
            || value_vectors.dim() != header.dim
        {
            return Err(Error::Format("codebook header disagrees with stored vectors".into()));
        }
        Self::from_parts(id_vectors, value_vectors, header.generation, header.binding, header.seed)
    }
}

/// Reads `magic`, a `u16` version, a `u32` length and that many bytes of JSON.
pub(crate) fn read_json_header<R: Read, T: serde::de::DeserializeOwned>(
    r: &mut R,
    magic: &[u8; 4],
    version: u16,
) -> Result<T> {
    let mut head = [0u8; 10];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &head[..4] != magic {
        return Err(Error::Format(format!("bad magic {:?}", &head[..4])));
    }
    let found = u16::from_le_bytes([head[4], head[5]]);
    if found != version {
        return Err(Error::Format(format!("unsupported version {found}")));
    }
    let len = u32::from_le_bytes([head[6], head[7], head[8], head[9]]) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)
        .map_err(|e| Error::Format(format!("truncated JSON header: {e}")))?;
    Ok(serde_json::from_slice(&json)?)
}

struct Scratch {
    rows: Vec<u32>,
    counts: Vec<u32>,
}

impl Scratch {
    fn new(c: &Codebook) -> Self {
        Self {
            rows: vec![0; c.feature_count() * c.id_vectors.words_per_row()],
            counts: vec![0; c.dim()],
        }
    }
}

/// Copies bits `0..len` of `src` to bits `at..at + len` of `dst` (assumed zero there).
fn copy_bit_prefix(src: &[u32], len: usize, dst: &mut [u32], at: usize) {
    for j in 0..len {
        let bit = (src[j / WORD_BITS] >> (j % WORD_BITS)) & 1;
        let k = at + j;
        dst[k / WORD_BITS] |= bit << (k % WORD_BITS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypervector::xor_bind;
    use ndarray::Array2;

    fn book(binding: BindingStrategy, features: usize, dim: usize) -> Codebook {
        Codebook::generate(features, 8, dim, GenerationStrategy::Random, binding, 99).unwrap()
    }

    #[test]
    fn strategy_names_roundtrip() {
        for g in [GenerationStrategy::Random, GenerationStrategy::ScaleRandom, GenerationStrategy::Sandwich] {
            assert_eq!(g.name().parse::<GenerationStrategy>().unwrap(), g);
        }
        for b in [BindingStrategy::IdLevel, BindingStrategy::Permutation, BindingStrategy::Appending] {
            assert_eq!(b.name().parse::<BindingStrategy>().unwrap(), b);
        }
        assert!("gaussian".parse::<GenerationStrategy>().is_err());
        assert!("concat".parse::<BindingStrategy>().is_err());
    }

    #[test]
    fn regeneration_is_bit_identical() {
        for g in [GenerationStrategy::Random, GenerationStrategy::ScaleRandom, GenerationStrategy::Sandwich] {
            let a = Codebook::generate(5, 6, 512, g, BindingStrategy::IdLevel, 3).unwrap();
            let b = Codebook::generate(5, 6, 512, g, BindingStrategy::IdLevel, 3).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_feature_id_level_is_plain_xor() {
        let c = book(BindingStrategy::IdLevel, 1, 300);
        let tb = c.tiebreak();
        let h = c.encode(&[5], tb.row(0)).unwrap();
        let expected = xor_bind(
            &c.id_vectors().slice_rows(0, 1),
            &c.value_vectors().slice_rows(5, 6),
        )
        .unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn unanimous_rows_survive_majority() {
        // two features whose bound rows coincide: ID_0 ^ V_a == ID_1 ^ V_b
        let dim = 64;
        let ids = PackedBitMatrix::ones(2, dim);
        let values = generate_random(3, dim, 1).unwrap();
        let c = Codebook::from_parts(ids, values, GenerationStrategy::Random, BindingStrategy::IdLevel, 0).unwrap();
        let tb = PackedBitMatrix::zeros(1, dim);
        let h = c.encode(&[2, 2], tb.row(0)).unwrap();
        let bound = xor_bind(&c.id_vectors().slice_rows(0, 1), &c.value_vectors().slice_rows(2, 3)).unwrap();
        assert_eq!(h, bound);
    }

    #[test]
    fn permutation_single_feature_is_value_vector() {
        let c = book(BindingStrategy::Permutation, 1, 200);
        let tb = c.tiebreak();
        let h = c.encode(&[3], tb.row(0)).unwrap();
        assert_eq!(h, c.value_vectors().slice_rows(3, 4));
    }

    #[test]
    fn appending_segments_are_independent() {
        let (features, dim) = (4, 130);
        let c = book(BindingStrategy::Appending, features, dim);
        let tb = c.tiebreak();
        let a = c.encode(&[0, 1, 2, 3], tb.row(0)).unwrap();
        let b = c.encode(&[0, 7, 2, 3], tb.row(0)).unwrap();
        let seg = dim / features;
        for j in 0..dim {
            if !(seg..2 * seg).contains(&j) {
                assert_eq!(a.get(0, j), b.get(0, j), "bit {j}");
            }
        }
        for j in features * seg..dim {
            assert!(!a.get(0, j));
        }
        for j in 0..seg {
            assert_eq!(a.get(0, seg + j), c.value_vectors().get(1, j));
        }
    }

    #[test]
    fn appending_needs_room() {
        assert!(Codebook::generate(10, 4, 8, GenerationStrategy::Random, BindingStrategy::Appending, 0).is_err());
    }

    #[test]
    fn encode_rejects_bad_input() {
        let c = book(BindingStrategy::IdLevel, 3, 64);
        let tb = c.tiebreak();
        assert!(c.encode(&[0, 8, 1], tb.row(0)).is_err());
        assert!(c.encode(&[0, 1], tb.row(0)).is_err());
        let wrong = PackedBitMatrix::zeros(1, 65);
        assert!(c.encode(&[0, 1, 2], wrong.row(0)).is_err());
    }

    #[test]
    fn batch_matches_single() {
        for binding in [BindingStrategy::IdLevel, BindingStrategy::Permutation, BindingStrategy::Appending] {
            let c = book(binding, 6, 333);
            let tb = c.tiebreak();
            let bins = Array2::from_shape_fn((40, 6), |(i, f)| (i * 7 + f * 3) % 8);
            let batch = c.encode_batch(bins.view(), tb.row(0)).unwrap();
            for i in 0..40 {
                let row: Vec<usize> = bins.row(i).to_vec();
                assert_eq!(batch.slice_rows(i, i + 1), c.encode(&row, tb.row(0)).unwrap());
            }
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let c = Codebook::generate(7, 5, 100, GenerationStrategy::Sandwich, BindingStrategy::Permutation, 17).unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"HVCB");
        assert_eq!(Codebook::read(buf.as_slice()).unwrap(), c);
    }
}
