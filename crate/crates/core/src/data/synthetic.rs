use super::Dataset;
use crate::seed;
use crate::{Error, Result};
use ndarray::Array2;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

/// Seeded Gaussian-cluster dataset.
///
/// Every class gets a random centre in `[0, 1]^features`; samples are the
/// centre of their class plus `N(0, noise^2)` per feature. Labels are drawn
/// from `class_weights` (uniform when empty) in runs of `run_length`
/// samples, and segment ids split the rows into `segments` equal blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub features: usize,
    pub samples: usize,
    pub noise: f64,
    pub segments: usize,
    pub run_length: usize,
    pub class_weights: Vec<f64>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            classes: 5,
            features: 30,
            samples: 5000,
            noise: 0.25,
            segments: 1,
            run_length: 1,
            class_weights: Vec::new(),
            seed: 0,
        }
    }
}

pub fn synthesize(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.classes == 0 || spec.features == 0 || spec.samples == 0 {
        return Err(Error::InvalidParameter(
            "synthetic data needs at least one class, feature and sample".into(),
        ));
    }
    if spec.segments == 0 || spec.segments > spec.samples || spec.run_length == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= segments <= samples and run_length >= 1, got segments={} run_length={}",
            spec.segments, spec.run_length
        )));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise must be finite and >= 0, got {}", spec.noise)));
    }
    let weights = if spec.class_weights.is_empty() {
        vec![1.0; spec.classes]
    } else if spec.class_weights.len() == spec.classes {
        spec.class_weights.clone()
    } else {
        return Err(Error::InvalidParameter(format!(
            "{} class weights for {} classes",
            spec.class_weights.len(),
            spec.classes
        )));
    };
    let picker = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(format!("class weights: {e}")))?;
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;

    let mut rng = seed::rng(spec.seed);
    let centres = Array2::from_shape_fn((spec.classes, spec.features), |_| rng.random::<f64>());
    let mut y = Vec::with_capacity(spec.samples);
    while y.len() < spec.samples {
        let c = picker.sample(&mut rng);
        let run = spec.run_length.min(spec.samples - y.len());
        y.extend(std::iter::repeat_n(c, run));
    }
    let x = Array2::from_shape_fn((spec.samples, spec.features), |(r, f)| {
        centres[[y[r], f]] + noise.sample(&mut rng)
    });
    let segments = (spec.segments > 1)
        .then(|| (0..spec.samples).map(|i| (i * spec.segments / spec.samples) as u64).collect());
    Dataset::new(x, y, segments)
}
