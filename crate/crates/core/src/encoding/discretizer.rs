use crate::{Error, Result};
use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

/// Maps raw feature values to `bins` equal-width bins between the per-feature
/// minimum and maximum observed at fit time.
///
/// Values outside the fitted range clamp to the edge bins. A constant
/// feature (min == max) always maps to bin 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    bins: usize,
}

impl Discretizer {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidParameter(format!("bin count must be >= 2, got {bins}")));
        }
        if mins.len() != maxs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} minima but {} maxima",
                mins.len(),
                maxs.len()
            )));
        }
        if let Some(f) = (0..mins.len()).find(|&f| !(mins[f] <= maxs[f])) {
            return Err(Error::InvalidParameter(format!(
                "feature {f}: min {} exceeds max {}",
                mins[f], maxs[f]
            )));
        }
        Ok(Self { mins, maxs, bins })
    }

    /// Per-feature min/max scan over the rows of `train`.
    pub fn fit(train: ArrayView2<'_, f64>, bins: usize) -> Result<Self> {
        if train.nrows() == 0 || train.ncols() == 0 {
            return Err(Error::EmptyInput("cannot fit a discretizer on an empty matrix".into()));
        }
        let (mins, maxs) = train
            .columns()
            .into_iter()
            .map(|col| {
                col.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .unzip();
        Self::new(mins, maxs, bins)
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn feature_count(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn is_degenerate(&self, feature: usize) -> bool {
        self.mins[feature] == self.maxs[feature]
    }

    #[inline]
    pub fn bin_of(&self, feature: usize, x: f64) -> usize {
        if self.is_degenerate(feature) {
            return 0;
        }
        let (lo, hi) = (self.mins[feature], self.maxs[feature]);
        let scaled = ((x - lo) / (hi - lo) * self.bins as f64).floor();
        // NaN and negatives saturate to 0 under `as`
        (scaled.max(0.0) as usize).min(self.bins - 1)
    }

    pub fn discretize(&self, x: ArrayView1<'_, f64>) -> Result<Vec<usize>> {
        if x.len() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: x.len(),
            });
        }
        Ok(x.iter().enumerate().map(|(f, &v)| self.bin_of(f, v)).collect())
    }

    /// Bin indices for every row of `x`.
    pub fn discretize_rows(&self, x: ArrayView2<'_, f64>) -> Result<Array2<usize>> {
        if x.ncols() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: x.ncols(),
            });
        }
        Ok(Array2::from_shape_fn(x.dim(), |(r, f)| self.bin_of(f, x[[r, f]])))
    }
}
