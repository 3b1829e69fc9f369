use crate::config::{Backend, ExperimentConfig, ReportConfig};
use crate::error::{CliError, CliResult};
use crate::pipeline::{self, stage, Encoded};
use hypervec::data::holdout;
use hypervec::eval::{time_stage, Timings};
use hypervec::Discretizer;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const BENCH_STAGES: [&str; 4] = [stage::ENCODE, stage::TRAIN_CLASSICAL, stage::TRAIN_ONLINE, stage::PREDICT];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub packed_seconds: f64,
    pub naive_seconds: f64,
    /// `naive / packed`.
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: ReportConfig,
    pub train_samples: usize,
    pub test_samples: usize,
    pub threads: usize,
    pub stages: Vec<StageTiming>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "D={} train={} test={} threads={}",
            self.config.dim, self.train_samples, self.test_samples, self.threads
        )?;
        writeln!(f, "{:<16} {:>12} {:>12} {:>9}", "stage", "packed_s", "naive_s", "speedup")?;
        for s in &self.stages {
            writeln!(
                f,
                "{:<16} {:>12.6} {:>12.6} {:>8.2}x",
                s.stage, s.packed_seconds, s.naive_seconds, s.speedup
            )?;
        }
        Ok(())
    }
}

struct BackendRun {
    train: Encoded,
    test: Encoded,
    classical: Vec<usize>,
    online: Vec<usize>,
    timings: Timings,
}

/// Runs encode / classical training / online training / prediction on both
/// backends over the same holdout split, checks that they agree exactly,
/// then reports per-stage times.
pub fn run_bench(cfg: &ExperimentConfig) -> CliResult<BenchReport> {
    cfg.validate()?;
    pipeline::with_threads(cfg.threads, || bench(cfg))?
}

fn bench(cfg: &ExperimentConfig) -> CliResult<BenchReport> {
    let d = pipeline::load_dataset(cfg)?;
    let classes = d.class_count().max(cfg.positive_class + 1);
    let plan = holdout(d.len(), cfg.train_fraction).map_err(|e| CliError::usage(e.to_string()))?;
    let fold = &plan.folds[0];
    let (train, test) = (d.select(&fold.train), d.select(&fold.test));
    let disc = Discretizer::fit(train.x.view(), cfg.bins)?;
    let train_bins = disc.discretize_rows(train.x.view())?;
    let test_bins = disc.discretize_rows(test.x.view())?;
    let cb = pipeline::codebook(cfg, d.feature_count())?;

    let run = |backend: Backend| -> CliResult<BackendRun> {
        let mut cfg = cfg.clone();
        cfg.backend = backend;
        let mut t = Timings::new();
        let (xtr, xte) = time_stage(&mut t, stage::ENCODE, || -> CliResult<_> {
            Ok((
                pipeline::encode(backend, &cb, train_bins.view())?,
                pipeline::encode(backend, &cb, test_bins.view())?,
            ))
        })?;
        let mc = time_stage(&mut t, stage::TRAIN_CLASSICAL, || {
            pipeline::train_classical(&cfg, &xtr, &train.y, classes)
        })?;
        let mo = time_stage(&mut t, stage::TRAIN_ONLINE, || pipeline::train_online(&cfg, &xtr, &train.y, classes))?;
        let (classical, online) = time_stage(&mut t, stage::PREDICT, || -> CliResult<_> {
            Ok((pipeline::predict(&mc, &xte)?, pipeline::predict(&mo, &xte)?))
        })?;
        Ok(BackendRun {
            train: xtr,
            test: xte,
            classical,
            online,
            timings: t,
        })
    };
    let packed = run(Backend::Packed)?;
    let naive = run(Backend::Naive)?;
    verify(&packed, &naive)?;

    let stages = BENCH_STAGES
        .iter()
        .map(|&s| {
            let p = packed.timings.get(s).unwrap_or(0.0);
            let n = naive.timings.get(s).unwrap_or(0.0);
            StageTiming {
                stage: s.to_string(),
                packed_seconds: p,
                naive_seconds: n,
                speedup: if p > 0.0 { n / p } else { f64::INFINITY },
            }
        })
        .collect();
    Ok(BenchReport {
        config: cfg.provenance(),
        train_samples: fold.train.len(),
        test_samples: fold.test.len(),
        threads: rayon::current_num_threads(),
        stages,
    })
}

fn verify(packed: &BackendRun, naive: &BackendRun) -> CliResult<()> {
    for (name, p, n) in [("train", &packed.train, &naive.train), ("test", &packed.test, &naive.test)] {
        if let (Encoded::Packed(p), Encoded::Naive(n)) = (p, n) {
            if *p != n.to_packed() {
                return Err(CliError::BackendMismatch(format!("encoded {name} vectors differ")));
            }
        }
    }
    compare_labels("classical", &packed.classical, &naive.classical)?;
    compare_labels("online", &packed.online, &naive.online)
}

/// Fails with [`CliError::BackendMismatch`] on the first differing label.
pub fn compare_labels(what: &str, packed: &[usize], naive: &[usize]) -> CliResult<()> {
    if packed.len() != naive.len() {
        return Err(CliError::BackendMismatch(format!(
            "{what}: {} packed labels vs {} naive",
            packed.len(),
            naive.len()
        )));
    }
    match packed.iter().zip(naive).position(|(a, b)| a != b) {
        None => Ok(()),
        Some(i) => Err(CliError::BackendMismatch(format!(
            "{what} prediction {i}: packed {} vs naive {}",
            packed[i], naive[i]
        ))),
    }
}
