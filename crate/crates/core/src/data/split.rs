use super::Dataset;
use crate::seed;
use crate::{Error, Result};
use rand::seq::index;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Segment held out as the test set, for segment-based plans.
    pub test_segment: Option<u64>,
}

/// Ordered train/test folds. Index lists are ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn segments_of(d: &Dataset) -> Result<(&[u64], Vec<u64>)> {
    let s = d
        .segments
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("dataset has no segment ids".into()))?;
    let ids = d.segment_ids().unwrap_or_default();
    if ids.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 distinct segments, found {}",
            ids.len()
        )));
    }
    Ok((s, ids))
}

/// Time-series split: for the k-th distinct segment (k >= 1), test on it and
/// train on every earlier segment.
pub fn tscv_folds(d: &Dataset) -> Result<SplitPlan> {
    let (s, ids) = segments_of(d)?;
    let folds = ids[1..]
        .iter()
        .map(|&id| {
            // segment ids are sorted, so the earlier segments form a prefix
            let start = s.partition_point(|&x| x < id);
            let end = s.partition_point(|&x| x <= id);
            Fold {
                train: (0..start).collect(),
                test: (start..end).collect(),
                test_segment: Some(id),
            }
        })
        .collect();
    Ok(SplitPlan { folds })
}

/// One fold per segment: test on it, train on all the others.
pub fn leave_one_segment_out(d: &Dataset) -> Result<SplitPlan> {
    let (s, ids) = segments_of(d)?;
    let folds = ids
        .iter()
        .map(|&id| {
            let (test, train) = (0..s.len()).partition(|&i| s[i] == id);
            Fold {
                train,
                test,
                test_segment: Some(id),
            }
        })
        .collect();
    Ok(SplitPlan { folds })
}

/// Chronological holdout: the first `train_fraction` of rows train, the rest test.
pub fn holdout(n: usize, train_fraction: f64) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let cut = ((n as f64) * train_fraction).round() as usize;
    if cut == 0 || cut >= n {
        return Err(Error::InvalidParameter(format!(
            "{n} samples are too few for a {train_fraction} holdout"
        )));
    }
    Ok(SplitPlan {
        folds: vec![Fold {
            train: (0..cut).collect(),
            test: (cut..n).collect(),
            test_segment: None,
        }],
    })
}

/// Keeps every `minority` sample plus `min(factor * minority_count, rest)`
/// other samples drawn without replacement. Row order is preserved.
pub fn subsample_factor(d: &Dataset, minority: usize, factor: usize, seed: u64) -> Result<Dataset> {
    if factor == 0 {
        return Err(Error::InvalidParameter("subsample factor must be >= 1".into()));
    }
    let (minor, major): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| d.y[i] == minority);
    if minor.is_empty() {
        return Err(Error::InvalidParameter(format!("class {minority} has no samples")));
    }
    let keep = (factor * minor.len()).min(major.len());
    let mut rng = seed::rng(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, major.len(), keep)
        .into_iter()
        .map(|k| major[k])
        .chain(minor)
        .collect();
    chosen.sort_unstable();
    Ok(d.select(&chosen))
}
