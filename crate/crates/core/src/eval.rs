//! Label smoothing, sample- and episode-level metrics, stage timing.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Centered majority filter over a binary sequence. The window is clipped at
/// the sequence ends; a tie (possible only in a clipped window) yields 1.
pub fn smooth_labels(labels: &[u8], window: usize) -> Result<Vec<u8>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("smoothing window must be odd, got {window}")));
    }
    if let Some((i, &v)) = labels.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(Error::NonBinary { row: 0, col: i, value: v });
    }
    let n = labels.len();
    let half = window / 2;
    let mut prefix = vec![0usize; n + 1];
    for (i, &v) in labels.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v as usize;
    }
    Ok((0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(half), (i + half + 1).min(n));
            let ones = prefix[hi] - prefix[lo];
            u8::from(2 * ones >= hi - lo)
        })
        .collect())
}

/// Maps class labels to 0/1 against `positive`.
pub fn binarize_labels(labels: &[usize], positive: usize) -> Vec<u8> {
    labels.iter().map(|&l| u8::from(l == positive)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn ppv(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.ppv()?, self.tpr()?);
        (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub detected: u64,
    pub total: u64,
    pub false_positive_episodes: u64,
}

/// Stage name to accumulated wall-clock seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timings(BTreeMap<String, f64>);

impl Timings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `seconds` to `stage`.
    pub fn record(&mut self, stage: &str, seconds: f64) {
        *self.0.entry(stage.to_string()).or_insert(0.0) += seconds;
    }

    pub fn get(&self, stage: &str) -> Option<f64> {
        self.0.get(stage).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn merge(&mut self, other: &Timings) {
        for (k, v) in other.iter() {
            self.record(k, v);
        }
    }
}

/// Runs `f`, recording its wall-clock time under `stage`.
pub fn time_stage<R>(timings: &mut Timings, stage: &str, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let out = f();
    timings.record(stage, start.elapsed().as_secs_f64());
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub positive_class: usize,
    pub confusion: Confusion,
    pub accuracy: f64,
    /// Absent when undefined (no actual positives).
    pub tpr: Option<f64>,
    /// Absent when undefined (no predicted positives).
    pub ppv: Option<f64>,
    pub f1: Option<f64>,
    pub episodes: Option<EpisodeMetrics>,
    #[serde(default, skip_serializing_if = "Timings::is_empty")]
    pub timings: Timings,
}

impl EvalReport {
    pub fn csv_header() -> &'static [&'static str] {
        &[
            "accuracy",
            "tpr",
            "ppv",
            "f1",
            "tp",
            "fp",
            "tn",
            "fn",
            "episodes_detected",
            "episodes_total",
            "false_positive_episodes",
        ]
    }

    /// Values for [`EvalReport::csv_header`]; undefined ratios are empty cells.
    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let ep = |f: fn(&EpisodeMetrics) -> u64| self.episodes.as_ref().map_or_else(String::new, |e| f(e).to_string());
        vec![
            self.accuracy.to_string(),
            opt(self.tpr),
            opt(self.ppv),
            opt(self.f1),
            self.confusion.tp.to_string(),
            self.confusion.fp.to_string(),
            self.confusion.tn.to_string(),
            self.confusion.fn_.to_string(),
            ep(|e| e.detected),
            ep(|e| e.total),
            ep(|e| e.false_positive_episodes),
        ]
    }
}

/// One-vs-rest confusion counts for `positive`, plus overall accuracy over
/// all classes.
pub fn sample_metrics(pred: &[usize], truth: &[usize], positive: usize) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut c = Confusion::default();
    let mut correct = 0u64;
    for (&p, &t) in pred.iter().zip(truth) {
        correct += u64::from(p == t);
        match (p == positive, t == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(EvalReport {
        positive_class: positive,
        confusion: c,
        accuracy: if pred.is_empty() { 0.0 } else { correct as f64 / pred.len() as f64 },
        tpr: c.tpr(),
        ppv: c.ppv(),
        f1: c.f1(),
        episodes: None,
        timings: Timings::new(),
    })
}

/// Maximal runs of `true`, as half-open ranges.
fn runs(flags: impl Iterator<Item = bool>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, f) in flags.enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        out.push((s, n));
    }
    out
}

/// Episode-level detection: an episode is a maximal run of positive truth
/// labels, detected if any positive prediction falls inside it. A predicted
/// run touching no truth episode counts as one false-positive episode.
pub fn episode_metrics(pred: &[usize], truth: &[usize], positive: usize) -> Result<EpisodeMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let p: Vec<bool> = pred.iter().map(|&l| l == positive).collect();
    let t: Vec<bool> = truth.iter().map(|&l| l == positive).collect();
    let truth_runs = runs(t.iter().copied());
    let pred_runs = runs(p.iter().copied());
    Ok(EpisodeMetrics {
        detected: truth_runs.iter().filter(|&&(s, e)| p[s..e].iter().any(|&b| b)).count() as u64,
        total: truth_runs.len() as u64,
        false_positive_episodes: pred_runs.iter().filter(|&&(s, e)| !t[s..e].iter().any(|&b| b)).count() as u64,
    })
}
