//! Byte-per-bit reference implementations.
//!
//! Every routine here mirrors a packed counterpart with plain scalar loops
//! over one `u8` per logical bit. Nothing is shared with the packed path
//! beyond the public data types used for conversion, so the two can be
//! compared differentially. Single-threaded and slow on purpose.

use crate::encoding::{BindingStrategy, Codebook};
use crate::model::Metric;
use crate::{Error, PackedBitMatrix, Result};

/// One byte (0 or 1) per bit, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBitMatrix {
    rows: usize,
    dim: usize,
    bits: Vec<u8>,
}

impl DenseBitMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            bits: vec![0; rows * dim],
        }
    }

    pub fn new(rows: usize, dim: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rows * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} bits for a {rows}x{dim} matrix",
                bits.len()
            )));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::NonBinary {
                row: i / dim,
                col: i % dim,
                value: bits[i],
            });
        }
        Ok(Self { rows, dim, bits })
    }

    pub fn from_packed(m: &PackedBitMatrix) -> Self {
        let mut bits = Vec::with_capacity(m.rows() * m.dim());
        for r in 0..m.rows() {
            for c in 0..m.dim() {
                bits.push(u8::from(m.get(r, c)));
            }
        }
        Self {
            rows: m.rows(),
            dim: m.dim(),
            bits,
        }
    }

    pub fn to_packed(&self) -> PackedBitMatrix {
        PackedBitMatrix::pack(self.rows, self.dim, &self.bits).expect("dense bits are binary")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.bits[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u8] {
        &mut self.bits[r * self.dim..(r + 1) * self.dim]
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.bits[r * self.dim + c]
    }

    pub fn storage_bytes(&self) -> usize {
        self.bits.len()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len(), self.dim);
        for (i, &r) in indices.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }
}

pub fn naive_xor(a: &DenseBitMatrix, b: &DenseBitMatrix) -> Result<DenseBitMatrix> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if b.rows != a.rows && b.rows != 1 {
        return Err(Error::ShapeMismatch(format!(
            "cannot bind {} rows with {} rows",
            a.rows, b.rows
        )));
    }
    let mut out = DenseBitMatrix::zeros(a.rows, a.dim);
    for r in 0..a.rows {
        let rb = if b.rows == 1 { 0 } else { r };
        for c in 0..a.dim {
            out.bits[r * a.dim + c] = a.get(r, c) ^ b.get(rb, c);
        }
    }
    Ok(out)
}

/// Bit `j` moves to `(j + shift) mod dim`.
pub fn naive_rotate(a: &DenseBitMatrix, shift: usize) -> DenseBitMatrix {
    let mut out = DenseBitMatrix::zeros(a.rows, a.dim);
    for r in 0..a.rows {
        for c in 0..a.dim {
            out.bits[r * a.dim + (c + shift) % a.dim] = a.get(r, c);
        }
    }
    out
}

pub fn naive_hsum(a: &DenseBitMatrix) -> Vec<u32> {
    (0..a.rows)
        .map(|r| a.row(r).iter().map(|&b| b as u32).sum())
        .collect()
}

pub fn naive_vsum(a: &DenseBitMatrix) -> Vec<u32> {
    let mut counts = vec![0u32; a.dim];
    for r in 0..a.rows {
        for c in 0..a.dim {
            counts[c] += a.get(r, c) as u32;
        }
    }
    counts
}

pub fn naive_transpose(a: &DenseBitMatrix) -> DenseBitMatrix {
    let mut out = DenseBitMatrix::zeros(a.dim, a.rows);
    for r in 0..a.rows {
        for c in 0..a.dim {
            out.bits[c * a.rows + r] = a.get(r, c);
        }
    }
    out
}

/// 1 where `2 * count > n`, 0 where `2 * count < n`, `tiebreak` otherwise.
pub fn naive_majority(counts: &[u32], n: usize, tiebreak: &[u8]) -> Result<Vec<u8>> {
    if tiebreak.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            got: tiebreak.len(),
        });
    }
    let mut out = Vec::with_capacity(counts.len());
    for (j, &k) in counts.iter().enumerate() {
        if k as usize > n {
            return Err(Error::CountExceedsTotal {
                index: j,
                count: k,
                total: n,
            });
        }
        let twice = 2 * k as usize;
        out.push(if twice > n {
            1
        } else if twice < n {
            0
        } else {
            tiebreak[j]
        });
    }
    Ok(out)
}

pub fn naive_hamming(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut diff = 0usize;
    for j in 0..a.len() {
        if a[j] != b[j] {
            diff += 1;
        }
    }
    Ok(diff as f64 / a.len() as f64)
}

/// `None` when either side is all zeros.
pub fn naive_cosine(a: &[f64], b: &[u8]) -> Option<f64> {
    let mut dot = 0.0;
    let mut sq = 0.0;
    let mut ones = 0u32;
    for j in 0..a.len() {
        sq += a[j] * a[j];
        if b[j] == 1 {
            dot += a[j];
            ones += 1;
        }
    }
    let norm = sq.sqrt();
    if norm == 0.0 || ones == 0 {
        return None;
    }
    Some(dot / (norm * (ones as f64).sqrt()))
}

/// Encodes one datapoint straight from the bit-level definition of each
/// binding strategy.
pub fn naive_encode(codebook: &Codebook, bins: &[usize], tiebreak: &[u8]) -> Result<Vec<u8>> {
    let ids = DenseBitMatrix::from_packed(codebook.id_vectors());
    let values = DenseBitMatrix::from_packed(codebook.value_vectors());
    naive_encode_dense(&ids, &values, codebook.binding(), bins, tiebreak)
}

pub fn naive_encode_dense(
    ids: &DenseBitMatrix,
    values: &DenseBitMatrix,
    binding: BindingStrategy,
    bins: &[usize],
    tiebreak: &[u8],
) -> Result<Vec<u8>> {
    let dim = ids.dim;
    let f_count = ids.rows;
    if bins.len() != f_count {
        return Err(Error::DimensionMismatch {
            expected: f_count,
            got: bins.len(),
        });
    }
    if let Some(&b) = bins.iter().find(|&&b| b >= values.rows) {
        return Err(Error::InvalidParameter(format!("bin {b} out of range")));
    }
    match binding {
        BindingStrategy::IdLevel | BindingStrategy::Permutation => {
            let mut counts = vec![0u32; dim];
            for f in 0..f_count {
                for j in 0..dim {
                    let bit = if binding == BindingStrategy::IdLevel {
                        ids.get(f, j) ^ values.get(bins[f], j)
                    } else {
                        // bit j of rotate(V, f) is bit (j - f) mod D of V
                        values.get(bins[f], (j + dim - f % dim) % dim)
                    };
                    counts[j] += bit as u32;
                }
            }
            naive_majority(&counts, f_count, tiebreak)
        }
        BindingStrategy::Appending => {
            let segment = dim / f_count;
            let mut out = vec![0u8; dim];
            for f in 0..f_count {
                for j in 0..segment {
                    out[f * segment + j] = values.get(bins[f], j);
                }
            }
            Ok(out)
        }
    }
}

/// Reference HD classifier state, mirroring [`crate::HdModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveModel {
    pub class_count: usize,
    pub dim: usize,
    pub accumulators: Vec<f64>,
    pub weight_totals: Vec<f64>,
    pub class_vectors: DenseBitMatrix,
    pub tiebreak: Vec<u8>,
    pub metric: Metric,
    pub learning_rate: f64,
}

impl NaiveModel {
    pub fn accumulator(&self, c: usize) -> &[f64] {
        &self.accumulators[c * self.dim..(c + 1) * self.dim]
    }

    /// Rebuilds class vector `c` by thresholding at half the weight total.
    pub fn binarize(&mut self, c: usize) {
        let half = self.weight_totals[c] * 0.5;
        for j in 0..self.dim {
            let a = self.accumulators[c * self.dim + j];
            let bit = if a > half {
                1
            } else if a < half {
                0
            } else {
                self.tiebreak[j]
            };
            self.class_vectors.bits[c * self.dim + j] = bit;
        }
    }

    /// Per-class scores of one query: distances (Hamming) or similarities
    /// (cosine, undefined scored as 0).
    pub fn scores(&self, h: &[u8]) -> Vec<f64> {
        (0..self.class_count)
            .map(|c| match self.metric {
                Metric::Hamming => naive_hamming(h, self.class_vectors.row(c)).expect("equal dims"),
                Metric::Cosine => naive_cosine(self.accumulator(c), h).unwrap_or(0.0),
            })
            .collect()
    }

    /// Full scan, ties to the lowest class index.
    pub fn classify(&self, h: &[u8]) -> usize {
        naive_argbest(self.metric, &self.scores(h))
    }
}

fn naive_argbest(metric: Metric, scores: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..scores.len() {
        let better = match metric {
            Metric::Hamming => scores[c] < scores[best],
            Metric::Cosine => scores[c] > scores[best],
        };
        if better {
            best = c;
        }
    }
    best
}

pub fn naive_train_classical(
    encoded: &DenseBitMatrix,
    labels: &[usize],
    class_count: usize,
    tiebreak: &[u8],
    metric: Metric,
    learning_rate: f64,
) -> Result<NaiveModel> {
    if labels.len() != encoded.rows {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            encoded.rows
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= class_count) {
        return Err(Error::InvalidParameter(format!("label {y} out of range")));
    }
    let dim = encoded.dim;
    let mut m = NaiveModel {
        class_count,
        dim,
        accumulators: vec![0.0; class_count * dim],
        weight_totals: vec![0.0; class_count],
        class_vectors: DenseBitMatrix::zeros(class_count, dim),
        tiebreak: tiebreak.to_vec(),
        metric,
        learning_rate,
    };
    for (i, &y) in labels.iter().enumerate() {
        for j in 0..dim {
            m.accumulators[y * dim + j] += encoded.get(i, j) as f64;
        }
        m.weight_totals[y] += 1.0;
    }
    for c in 0..class_count {
        m.binarize(c);
    }
    Ok(m)
}

/// One online batch, every sample scored against `frozen` (a copy of the
/// model taken at batch start), applied one element at a time.
pub fn naive_online_update(model: &mut NaiveModel, batch: &DenseBitMatrix, labels: &[usize], frozen: &NaiveModel) {
    let dim = model.dim;
    let mut touched = vec![false; model.class_count];
    for (i, &truth) in labels.iter().enumerate() {
        let h = batch.row(i);
        let scores = frozen.scores(h);
        let predicted = naive_argbest(frozen.metric, &scores);
        let delta = |s: f64| match frozen.metric {
            Metric::Hamming => s,
            Metric::Cosine => (1.0 - s).clamp(0.0, 1.0),
        };
        let delta_c = delta(scores[truth]);
        if delta_c != 0.0 {
            for j in 0..dim {
                if h[j] == 1 {
                    model.accumulators[truth * dim + j] += delta_c;
                }
            }
            model.weight_totals[truth] += delta_c;
            touched[truth] = true;
        }
        if predicted != truth {
            let penalty = model.learning_rate * (1.0 - delta(scores[predicted]));
            if penalty != 0.0 {
                for j in 0..dim {
                    if h[j] == 1 {
                        model.accumulators[predicted * dim + j] -= penalty;
                    }
                }
                touched[predicted] = true;
            }
        }
    }
    for c in 0..model.class_count {
        if touched[c] {
            model.binarize(c);
        }
    }
}

pub fn naive_train_online(
    encoded: &DenseBitMatrix,
    labels: &[usize],
    class_count: usize,
    batch_size: usize,
    tiebreak: &[u8],
    metric: Metric,
    learning_rate: f64,
) -> Result<NaiveModel> {
    if batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    let n = encoded.rows;
    let first = batch_size.min(n);
    let head: Vec<usize> = (0..first).collect();
    let mut m = naive_train_classical(
        &encoded.select_rows(&head),
        &labels[..first],
        class_count,
        tiebreak,
        metric,
        learning_rate,
    )?;
    let mut start = first;
    while start < n {
        let end = (start + batch_size).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let frozen = m.clone();
        naive_online_update(&mut m, &encoded.select_rows(&idx), &labels[start..end], &frozen);
        start = end;
    }
    Ok(m)
}

pub fn naive_predict(model: &NaiveModel, encoded: &DenseBitMatrix) -> Result<Vec<usize>> {
    if encoded.dim != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: encoded.dim,
        });
    }
    Ok((0..encoded.rows).map(|i| model.classify(encoded.row(i))).collect())
}
