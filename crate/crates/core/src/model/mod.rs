//! HD classifiers: classical single-pass accumulation and online,
//! distance-weighted updates.
//!
//! Each class `c` keeps a real-valued accumulator row `M_c` (length `D`) and a
//! positive-weight total `T_c`. Its binary class vector has bit `j` set iff
//! `M_c[j] > T_c / 2`, with exact equality resolved by the model's tiebreak
//! vector. For classical training all weights are 1, so this is plain
//! majority voting over the class's samples.
//!
//! Online training, per sample `H` of true class `C` predicted as `W`
//! against a frozen snapshot:
//!
//! ```text
//! M_C += δ_C · H                      (always)
//! M_W -= γ · (1 − δ_W) · H            (only when W != C)
//! ```
//!
//! where `δ` is the normalized distance to the class (Hamming: against the
//! binary class vector; cosine: `1 − similarity` against the accumulator,
//! clamped to `[0, 1]`).

mod similarity;

pub use similarity::{cosine_similarity, hamming_distance};

use crate::encoding::{generate_random, read_json_header};
use crate::hypervector::{majority_binarize, read_container, vertical_sum, write_container, xor_popcount, BitRow, PackedBitMatrix, WORD_BITS};
use crate::seed::{sub_seed, tags};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use similarity::{cosine_from_parts, l2_norm, sparse_dot};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Normalized Hamming distance to binary class vectors; lower is closer.
    Hamming,
    /// Cosine similarity to accumulator rows; higher is closer.
    Cosine,
}

impl Metric {
    pub const fn name(self) -> &'static str {
        match self {
            Self::Hamming => "hamming",
            Self::Cosine => "cosine",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hamming" => Ok(Self::Hamming),
            "cosine" => Ok(Self::Cosine),
            _ => Err(Error::InvalidParameter(format!(
                "unknown similarity metric '{s}' (expected hamming, cosine)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub metric: Metric,
    /// γ, the penalty scale for the wrongly predicted class.
    pub learning_rate: f64,
    /// Seeds the model's tiebreak vector.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Hamming,
            learning_rate: 1.0,
            seed: 0,
        }
    }
}

/// Predicted label plus the per-class scores it was chosen from:
/// normalized distances for Hamming, similarities for cosine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    pub distances: Vec<f64>,
}

/// The model's tiebreak row for `seed`.
pub fn model_tiebreak(dim: usize, seed: u64) -> Result<PackedBitMatrix> {
    generate_random(1, dim, sub_seed(seed, tags::MODEL_TIEBREAK))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdModel {
    class_count: usize,
    dim: usize,
    /// `class_count x dim`, row-major.
    accumulators: Vec<f64>,
    weight_totals: Vec<f64>,
    sample_counts: Vec<u64>,
    class_vectors: PackedBitMatrix,
    learning_rate: f64,
    metric: Metric,
    tiebreak: PackedBitMatrix,
    seed: u64,
    /// Free-form notes recorded alongside the model (codebook strategy etc.).
    pub provenance: BTreeMap<String, String>,
}

/// Frozen view of a model's class representation, used to score a batch of
/// online updates against the state at batch start.
#[derive(Clone, Debug)]
pub struct Snapshot {
    metric: Metric,
    dim: usize,
    class_vectors: PackedBitMatrix,
    /// Only kept for the cosine metric.
    accumulators: Vec<f64>,
    norms: Vec<f64>,
}

impl Snapshot {
    pub fn class_vectors(&self) -> &PackedBitMatrix {
        &self.class_vectors
    }

    fn scores(&self, h: &[u32]) -> Vec<f64> {
        score_row(self.metric, self.dim, &self.class_vectors, &self.accumulators, &self.norms, h)
    }
}

/// Per-class scores of one packed row. An undefined cosine similarity (all-zero
/// accumulator or query) scores 0.
fn score_row(
    metric: Metric,
    dim: usize,
    class_vectors: &PackedBitMatrix,
    accumulators: &[f64],
    norms: &[f64],
    h: &[u32],
) -> Vec<f64> {
    match metric {
        Metric::Hamming => class_vectors
            .iter_rows()
            .map(|cv| xor_popcount(h, cv.words()) as f64 / dim as f64)
            .collect(),
        Metric::Cosine => {
            let ones = h.iter().map(|w| w.count_ones()).sum::<u32>();
            norms
                .iter()
                .enumerate()
                .map(|(c, &norm)| {
                    if norm == 0.0 || ones == 0 {
                        0.0
                    } else {
                        let row = &accumulators[c * dim..(c + 1) * dim];
                        cosine_from_parts(sparse_dot(row, h), norm, ones)
                    }
                })
                .collect()
        }
    }
}

/// Index of the best score; ties go to the lowest class index.
fn best_class(metric: Metric, scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate().skip(1) {
        let better = match metric {
            Metric::Hamming => s < scores[best],
            Metric::Cosine => s > scores[best],
        };
        if better {
            best = c;
        }
    }
    best
}

/// Converts a score to the normalized distance δ used as an update weight.
#[inline]
fn delta_of(metric: Metric, score: f64) -> f64 {
    match metric {
        Metric::Hamming => score,
        Metric::Cosine => (1.0 - score).clamp(0.0, 1.0),
    }
}

/// `acc[j] += weight` for every set bit `j` of `h`.
#[inline]
fn add_weighted(acc: &mut [f64], h: &[u32], weight: f64) {
    for (wi, &w) in h.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let j = wi * WORD_BITS + w.trailing_zeros() as usize;
            acc[j] += weight;
            w &= w - 1;
        }
    }
}

impl HdModel {
    /// An untrained model: zero accumulators, class vectors equal to the tiebreak.
    pub fn new(class_count: usize, dim: usize, config: &ModelConfig) -> Result<Self> {
        if class_count == 0 {
            return Err(Error::InvalidParameter("class count must be >= 1".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be >= 1".into()));
        }
        if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be finite and >= 0, got {}",
                config.learning_rate
            )));
        }
        let tiebreak = model_tiebreak(dim, config.seed)?;
        let mut model = Self {
            class_count,
            dim,
            accumulators: vec![0.0; class_count * dim],
            weight_totals: vec![0.0; class_count],
            sample_counts: vec![0; class_count],
            class_vectors: PackedBitMatrix::zeros(class_count, dim),
            learning_rate: config.learning_rate,
            metric: config.metric,
            tiebreak,
            seed: config.seed,
            provenance: BTreeMap::new(),
        };
        model.refresh_binarization();
        Ok(model)
    }

    /// Single-pass accumulation: each class vector is the majority vote of its
    /// samples. Independent of sample order. A class without samples keeps
    /// the tiebreak vector and is reported by [`HdModel::empty_classes`].
    pub fn train_classical(
        encoded: &PackedBitMatrix,
        labels: &[usize],
        class_count: usize,
        config: &ModelConfig,
    ) -> Result<Self> {
        check_labels(encoded, labels, class_count)?;
        if encoded.rows() == 0 {
            return Err(Error::EmptyInput("no training samples".into()));
        }
        let mut model = Self::new(class_count, encoded.dim(), config)?;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); class_count];
        for (i, &y) in labels.iter().enumerate() {
            members[y].push(i);
        }
        let dim = model.dim;
        for (c, idx) in members.iter().enumerate() {
            let counts = vertical_sum(&encoded.select_rows(idx));
            let cv = majority_binarize(&counts, idx.len(), model.tiebreak.row(0))?;
            model.class_vectors.row_words_mut(c).copy_from_slice(cv.row(0).words());
            for (a, &k) in model.accumulators[c * dim..(c + 1) * dim].iter_mut().zip(counts.iter()) {
                *a = k as f64;
            }
            model.weight_totals[c] = idx.len() as f64;
            model.sample_counts[c] = idx.len() as u64;
        }
        Ok(model)
    }

    /// Online training in batches of `batch_size`.
    ///
    /// The first batch bootstraps the model classically; every later batch is
    /// applied with [`HdModel::online_update`] against a snapshot taken at
    /// the batch start. `batch_size == 1` updates after every datapoint;
    /// `batch_size >= n` reduces to classical training.
    pub fn train_online(
        encoded: &PackedBitMatrix,
        labels: &[usize],
        class_count: usize,
        batch_size: usize,
        config: &ModelConfig,
    ) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        check_labels(encoded, labels, class_count)?;
        if encoded.rows() == 0 {
            return Err(Error::EmptyInput("no training samples".into()));
        }
        let n = encoded.rows();
        let first = batch_size.min(n);
        let mut model = Self::train_classical(&encoded.slice_rows(0, first), &labels[..first], class_count, config)?;
        let wpr = encoded.words_per_row();
        for start in (first..n).step_by(batch_size) {
            let end = (start + batch_size).min(n);
            let snapshot = model.snapshot();
            model.apply_online(&encoded.words()[start * wpr..end * wpr], &labels[start..end], &snapshot);
        }
        Ok(model)
    }

    pub fn snapshot(&self) -> Snapshot {
        let (accumulators, norms) = match self.metric {
            Metric::Hamming => (Vec::new(), Vec::new()),
            Metric::Cosine => (self.accumulators.clone(), self.accumulator_norms()),
        };
        Snapshot {
            metric: self.metric,
            dim: self.dim,
            class_vectors: self.class_vectors.clone(),
            accumulators,
            norms,
        }
    }

    /// Applies one batch of online updates scored against `frozen`, then
    /// re-binarizes every class the batch touched. An empty batch is a no-op.
    pub fn online_update(&mut self, batch: &PackedBitMatrix, labels: &[usize], frozen: &Snapshot) -> Result<()> {
        check_labels(batch, labels, self.class_count)?;
        if batch.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: batch.dim(),
            });
        }
        if frozen.dim != self.dim || frozen.class_vectors.rows() != self.class_count || frozen.metric != self.metric {
            return Err(Error::ShapeMismatch("snapshot does not belong to this model".into()));
        }
        self.apply_online(batch.words(), labels, frozen);
        Ok(())
    }

    fn apply_online(&mut self, words: &[u32], labels: &[usize], frozen: &Snapshot) {
        let (dim, metric, gamma) = (self.dim, self.metric, self.learning_rate);
        let wpr = self.class_vectors.words_per_row();
        let mut touched = vec![false; self.class_count];
        // scoring only reads the snapshot, so it can run ahead in parallel;
        // updates are applied in sample order
        let all_scores: Vec<Vec<f64>> = if labels.len() > 1 {
            words.par_chunks_exact(wpr).map(|h| frozen.scores(h)).collect()
        } else {
            words.chunks_exact(wpr).map(|h| frozen.scores(h)).collect()
        };
        for ((h, &truth), scores) in words.chunks_exact(wpr).zip(labels).zip(all_scores) {
            let predicted = best_class(metric, &scores);
            let delta_c = delta_of(metric, scores[truth]);
            if delta_c != 0.0 {
                add_weighted(&mut self.accumulators[truth * dim..(truth + 1) * dim], h, delta_c);
                self.weight_totals[truth] += delta_c;
                touched[truth] = true;
            }
            self.sample_counts[truth] += 1;
            if predicted != truth {
                let penalty = gamma * (1.0 - delta_of(metric, scores[predicted]));
                if penalty != 0.0 {
                    add_weighted(&mut self.accumulators[predicted * dim..(predicted + 1) * dim], h, -penalty);
                    touched[predicted] = true;
                }
            }
        }
        for (c, _) in touched.iter().enumerate().filter(|(_, &t)| t) {
            self.binarize_class(c);
        }
    }

    fn binarize_class(&mut self, c: usize) {
        let dim = self.dim;
        let half = self.weight_totals[c] * 0.5;
        let acc = &self.accumulators[c * dim..(c + 1) * dim];
        let tb = self.tiebreak.row(0).words();
        let out = self.class_vectors.row_words_mut(c);
        for (wi, chunk) in acc.chunks(WORD_BITS).enumerate() {
            let mut w = 0u32;
            for (b, &a) in chunk.iter().enumerate() {
                let bit = if a > half {
                    1
                } else if a < half {
                    0
                } else {
                    (tb[wi] >> b) & 1
                };
                w |= bit << b;
            }
            out[wi] = w;
        }
    }

    /// Recomputes every class vector from its accumulator. Idempotent.
    pub fn refresh_binarization(&mut self) {
        for c in 0..self.class_count {
            self.binarize_class(c);
        }
    }

    fn accumulator_norms(&self) -> Vec<f64> {
        self.accumulators.chunks(self.dim).map(l2_norm).collect()
    }

    pub fn predict(&self, encoded: &PackedBitMatrix) -> Result<Vec<Prediction>> {
        if encoded.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: encoded.dim(),
            });
        }
        let norms = match self.metric {
            Metric::Hamming => Vec::new(),
            Metric::Cosine => self.accumulator_norms(),
        };
        Ok(encoded
            .words()
            .par_chunks(encoded.words_per_row())
            .map(|h| {
                let distances = score_row(self.metric, self.dim, &self.class_vectors, &self.accumulators, &norms, h);
                Prediction {
                    label: best_class(self.metric, &distances),
                    distances,
                }
            })
            .collect())
    }

    pub fn predict_labels(&self, encoded: &PackedBitMatrix) -> Result<Vec<usize>> {
        Ok(self.predict(encoded)?.into_iter().map(|p| p.label).collect())
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_vectors(&self) -> &PackedBitMatrix {
        &self.class_vectors
    }

    pub fn tiebreak(&self) -> BitRow<'_> {
        self.tiebreak.row(0)
    }

    /// All accumulators, `class_count x dim` row-major.
    pub fn accumulators(&self) -> &[f64] {
        &self.accumulators
    }

    pub fn accumulator(&self, class: usize) -> &[f64] {
        &self.accumulators[class * self.dim..(class + 1) * self.dim]
    }

    pub fn weight_totals(&self) -> &[f64] {
        &self.weight_totals
    }

    pub fn sample_counts(&self) -> &[u64] {
        &self.sample_counts
    }

    /// Classes that never received a training sample; their class vector is
    /// the tiebreak vector.
    pub fn empty_classes(&self) -> Vec<usize> {
        (0..self.class_count).filter(|&c| self.sample_counts[c] == 0).collect()
    }

    /// Binary layout: magic `b"HVMD"`, `u16` version, `u32` JSON header
    /// length, JSON header, `HVPB` class vectors, `HVPB` tiebreak, then
    /// `class_count * dim` accumulators and `class_count` weight totals as
    /// little-endian `f64`.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&ModelHeader {
            class_count: self.class_count,
            dim: self.dim,
            learning_rate: self.learning_rate,
            metric: self.metric,
            seed: self.seed,
            sample_counts: self.sample_counts.clone(),
            empty_classes: self.empty_classes(),
            provenance: self.provenance.clone(),
        })?;
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        write_container(&self.class_vectors, &mut w)?;
        write_container(&self.tiebreak, &mut w)?;
        let mut buf = Vec::with_capacity(8 * (self.accumulators.len() + self.class_count));
        for v in self.accumulators.iter().chain(&self.weight_totals) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let header: ModelHeader = read_json_header(&mut r, MODEL_MAGIC, MODEL_VERSION)?;
        let class_vectors = read_container(&mut r)?;
        let tiebreak = read_container(&mut r)?;
        if class_vectors.rows() != header.class_count
            || class_vectors.dim() != header.dim
            || tiebreak.rows() != 1
            || tiebreak.dim() != header.dim
            || header.sample_counts.len() != header.class_count
        {
            return Err(Error::Format("model header disagrees with stored vectors".into()));
        }
        let n = header.class_count * header.dim + header.class_count;
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)
            .map_err(|e| Error::Format(format!("truncated accumulators: {e}")))?;
        let mut values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let weight_totals = values.split_off(header.class_count * header.dim);
        Ok(Self {
            class_count: header.class_count,
            dim: header.dim,
            accumulators: values,
            weight_totals,
            sample_counts: header.sample_counts,
            class_vectors,
            learning_rate: header.learning_rate,
            metric: header.metric,
            tiebreak,
            seed: header.seed,
            provenance: header.provenance,
        })
    }
}

const MODEL_MAGIC: &[u8; 4] = b"HVMD";
const MODEL_VERSION: u16 = 1;

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    class_count: usize,
    dim: usize,
    learning_rate: f64,
    metric: Metric,
    seed: u64,
    sample_counts: Vec<u64>,
    empty_classes: Vec<usize>,
    provenance: BTreeMap<String, String>,
}

fn check_labels(encoded: &PackedBitMatrix, labels: &[usize], class_count: usize) -> Result<()> {
    if labels.len() != encoded.rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            encoded.rows()
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= class_count) {
        return Err(Error::InvalidParameter(format!(
            "label {y} out of range for {class_count} classes"
        )));
    }
    Ok(())
}
