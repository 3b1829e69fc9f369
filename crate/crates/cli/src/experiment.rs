use crate::config::{ExperimentConfig, ReportConfig, SplitMode};
use crate::error::{CliError, CliResult};
use crate::pipeline::{self, FoldOutput};
use hypervec::data::{holdout, leave_one_segment_out, tscv_folds, Dataset, SplitPlan};
use hypervec::eval::{binarize_labels, episode_metrics, sample_metrics, smooth_labels, EvalReport, Timings};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Raw and (for two-class problems) smoothed metrics of one classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub raw: EvalReport,
    pub smoothed: Option<EvalReport>,
}

/// Deterministic part of an experiment's result; timings live separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ReportConfig,
    pub samples: usize,
    pub evaluated: usize,
    pub class_count: usize,
    pub folds: usize,
    pub classical: Option<ModelReport>,
    pub online: Option<ModelReport>,
}

pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub plan: SplitPlan,
    /// Evaluated sample indices, ascending.
    pub indices: Vec<usize>,
    pub truth: Vec<usize>,
    pub segments: Option<Vec<u64>>,
    pub classical: Option<Vec<usize>>,
    pub online: Option<Vec<usize>>,
    pub classical_smoothed: Option<Vec<usize>>,
    pub online_smoothed: Option<Vec<usize>>,
    pub timings: Timings,
}

pub fn split_plan(cfg: &ExperimentConfig, d: &Dataset) -> CliResult<SplitPlan> {
    let plan = match cfg.split {
        SplitMode::Tscv => tscv_folds(d),
        SplitMode::Loso => leave_one_segment_out(d),
        SplitMode::Single => holdout(d.len(), cfg.train_fraction),
    };
    plan.map_err(|e| CliError::usage(format!("split '{}': {e}", cfg.split)))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentOutcome> {
    cfg.validate()?;
    pipeline::with_threads(cfg.threads, || run(cfg))?
}

fn run(cfg: &ExperimentConfig) -> CliResult<ExperimentOutcome> {
    let d = pipeline::load_dataset(cfg)?;
    let classes = d.class_count().max(cfg.positive_class + 1);
    let plan = split_plan(cfg, &d)?;
    let cb = pipeline::codebook(cfg, d.feature_count())?;

    let n = d.len();
    let mut classical = vec![None; n];
    let mut online = vec![None; n];
    let mut timings = Timings::new();
    for fold in &plan.folds {
        let FoldOutput {
            classical: c,
            online: o,
        } = pipeline::run_fold(cfg, &cb, &d, &fold.train, &fold.test, classes, &mut timings)?;
        for (slot, preds) in [(&mut classical, c), (&mut online, o)] {
            if let Some(p) = preds {
                for (&i, l) in fold.test.iter().zip(p) {
                    slot[i] = Some(l);
                }
            }
        }
    }

    // concatenate in original sample order
    let indices: Vec<usize> = (0..n)
        .filter(|&i| classical[i].is_some() || online[i].is_some())
        .collect();
    if indices.is_empty() {
        return Err(CliError::usage("split plan leaves no sample to evaluate"));
    }
    let truth: Vec<usize> = indices.iter().map(|&i| d.y[i]).collect();
    let gather = |v: &[Option<usize>]| -> Option<Vec<usize>> { indices.iter().map(|&i| v[i]).collect() };
    let classical = gather(&classical);
    let online = gather(&online);

    let binary = classes == 2;
    let evaluate = |pred: &Option<Vec<usize>>| -> CliResult<(Option<ModelReport>, Option<Vec<usize>>)> {
        let Some(pred) = pred else { return Ok((None, None)) };
        let mut raw = sample_metrics(pred, &truth, cfg.positive_class)?;
        let mut smoothed = None;
        let mut smoothed_labels = None;
        if binary {
            raw.episodes = Some(episode_metrics(pred, &truth, cfg.positive_class)?);
            let negative = 1 - cfg.positive_class.min(1);
            let s: Vec<usize> = smooth_labels(&binarize_labels(pred, cfg.positive_class), cfg.smooth_window)?
                .into_iter()
                .map(|b| if b == 1 { cfg.positive_class } else { negative })
                .collect();
            let mut r = sample_metrics(&s, &truth, cfg.positive_class)?;
            r.episodes = Some(episode_metrics(&s, &truth, cfg.positive_class)?);
            smoothed = Some(r);
            smoothed_labels = Some(s);
        }
        Ok((Some(ModelReport { raw, smoothed }), smoothed_labels))
    };
    let (classical_report, classical_smoothed) = evaluate(&classical)?;
    let (online_report, online_smoothed) = evaluate(&online)?;

    Ok(ExperimentOutcome {
        report: ExperimentReport {
            config: cfg.provenance(),
            samples: n,
            evaluated: indices.len(),
            class_count: classes,
            folds: plan.len(),
            classical: classical_report,
            online: online_report,
        },
        plan,
        segments: d.segments.as_ref().map(|s| indices.iter().map(|&i| s[i]).collect()),
        indices,
        truth,
        classical,
        online,
        classical_smoothed,
        online_smoothed,
        timings,
    })
}

pub const METRICS_FILE: &str = "metrics.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const TIMINGS_FILE: &str = "timings.json";
pub const SPLITS_FILE: &str = "splits.json";

impl ExperimentOutcome {
    /// Writes `metrics.json`, `predictions.csv`, `splits.json` (all
    /// deterministic) and `timings.json` into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join(METRICS_FILE), &self.report)?;
        write_json(&dir.join(SPLITS_FILE), &self.plan)?;
        write_json(&dir.join(TIMINGS_FILE), &self.timings)?;
        self.write_predictions(std::fs::File::create(dir.join(PREDICTIONS_FILE))?)
    }

    pub fn write_predictions<W: Write>(&self, w: W) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        let columns: Vec<(&str, Option<&Vec<usize>>)> = vec![
            ("classical", self.classical.as_ref()),
            ("classical_smoothed", self.classical_smoothed.as_ref()),
            ("online", self.online.as_ref()),
            ("online_smoothed", self.online_smoothed.as_ref()),
        ];
        let present: Vec<_> = columns.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))).collect();
        let mut header = vec!["index"];
        if self.segments.is_some() {
            header.push("segment");
        }
        header.push("truth");
        header.extend(present.iter().map(|(n, _)| *n));
        out.write_record(&header)?;
        for (k, &i) in self.indices.iter().enumerate() {
            let mut row = vec![i.to_string()];
            if let Some(s) = &self.segments {
                row.push(s[k].to_string());
            }
            row.push(self.truth[k].to_string());
            row.extend(present.iter().map(|(_, v)| v[k].to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
