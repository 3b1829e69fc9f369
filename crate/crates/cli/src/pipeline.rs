//! Encode / train / predict dispatched to either backend.

use crate::config::{Backend, ExperimentConfig};
use crate::error::{CliError, CliResult};
use hypervec::data::{self, Dataset};
use hypervec::eval::{time_stage, Timings};
use hypervec::model::model_tiebreak;
use hypervec::reference::{naive_encode, naive_predict, naive_train_classical, naive_train_online, DenseBitMatrix, NaiveModel};
use hypervec::{Codebook, Discretizer, HdModel, ModelConfig, PackedBitMatrix};
use ndarray::ArrayView2;

pub enum Encoded {
    Packed(PackedBitMatrix),
    Naive(DenseBitMatrix),
}

pub enum Trained {
    Packed(HdModel),
    Naive(NaiveModel),
}

/// Stage names used in timing reports.
pub mod stage {
    pub const DISCRETIZE: &str = "discretize";
    pub const ENCODE: &str = "encode";
    pub const TRAIN_CLASSICAL: &str = "train_classical";
    pub const TRAIN_ONLINE: &str = "train_online";
    pub const PREDICT: &str = "predict";
}

pub fn load_dataset(cfg: &ExperimentConfig) -> CliResult<Dataset> {
    let mut d = match (&cfg.dataset, &cfg.synthetic) {
        (Some(path), None) => data::load_csv(path, &cfg.schema())?,
        (None, Some(spec)) => data::synthesize(spec).map_err(|e| CliError::usage(format!("synthetic: {e}")))?,
        _ => return Err(CliError::usage("set exactly one of `dataset` and `synthetic`")),
    };
    if let Some(factor) = cfg.subsample_factor {
        d = data::subsample_factor(&d, cfg.positive_class, factor, cfg.seed())?;
    }
    Ok(d)
}

pub fn codebook(cfg: &ExperimentConfig, features: usize) -> CliResult<Codebook> {
    Codebook::generate(features, cfg.bins, cfg.dim, cfg.generation, cfg.binding, cfg.seed())
        .map_err(|e| CliError::usage(format!("codebook: {e}")))
}

pub fn model_config(cfg: &ExperimentConfig) -> ModelConfig {
    ModelConfig {
        metric: cfg.metric,
        learning_rate: cfg.gamma,
        seed: cfg.seed(),
    }
}

pub fn encode(backend: Backend, cb: &Codebook, bins: ArrayView2<'_, usize>) -> CliResult<Encoded> {
    let tiebreak = cb.tiebreak();
    Ok(match backend {
        Backend::Packed => Encoded::Packed(cb.encode_batch(bins, tiebreak.row(0))?),
        Backend::Naive => {
            let tb = DenseBitMatrix::from_packed(&tiebreak);
            let mut bits = Vec::with_capacity(bins.nrows() * cb.dim());
            for row in bins.rows() {
                bits.extend(naive_encode(cb, &row.to_vec(), tb.row(0))?);
            }
            Encoded::Naive(DenseBitMatrix::new(bins.nrows(), cb.dim(), bits)?)
        }
    })
}

fn naive_tiebreak(cfg: &ExperimentConfig) -> CliResult<Vec<u8>> {
    let tb = model_tiebreak(cfg.dim, cfg.seed())?;
    Ok(DenseBitMatrix::from_packed(&tb).bits().to_vec())
}

pub fn train_classical(cfg: &ExperimentConfig, x: &Encoded, labels: &[usize], classes: usize) -> CliResult<Trained> {
    Ok(match x {
        Encoded::Packed(m) => Trained::Packed(HdModel::train_classical(m, labels, classes, &model_config(cfg))?),
        Encoded::Naive(d) => Trained::Naive(naive_train_classical(
            d,
            labels,
            classes,
            &naive_tiebreak(cfg)?,
            cfg.metric,
            cfg.gamma,
        )?),
    })
}

pub fn train_online(cfg: &ExperimentConfig, x: &Encoded, labels: &[usize], classes: usize) -> CliResult<Trained> {
    Ok(match x {
        Encoded::Packed(m) => Trained::Packed(HdModel::train_online(
            m,
            labels,
            classes,
            cfg.batch_size,
            &model_config(cfg),
        )?),
        Encoded::Naive(d) => Trained::Naive(naive_train_online(
            d,
            labels,
            classes,
            cfg.batch_size,
            &naive_tiebreak(cfg)?,
            cfg.metric,
            cfg.gamma,
        )?),
    })
}

pub fn predict(model: &Trained, x: &Encoded) -> CliResult<Vec<usize>> {
    Ok(match (model, x) {
        (Trained::Packed(m), Encoded::Packed(q)) => m.predict_labels(q)?,
        (Trained::Naive(m), Encoded::Naive(q)) => naive_predict(m, q)?,
        _ => return Err(CliError::usage("model and queries come from different backends")),
    })
}

/// Labels predicted for one train/test split.
pub struct FoldOutput {
    pub classical: Option<Vec<usize>>,
    pub online: Option<Vec<usize>>,
}

/// Fits the discretizer on `train` only, encodes both sides, trains the
/// configured classifiers and predicts `test`.
pub fn run_fold(
    cfg: &ExperimentConfig,
    cb: &Codebook,
    d: &Dataset,
    train: &[usize],
    test: &[usize],
    classes: usize,
    timings: &mut Timings,
) -> CliResult<FoldOutput> {
    let train_set = d.select(train);
    let test_set = d.select(test);
    let (train_bins, test_bins) = time_stage(timings, stage::DISCRETIZE, || -> CliResult<_> {
        let disc = Discretizer::fit(train_set.x.view(), cfg.bins)?;
        Ok((disc.discretize_rows(train_set.x.view())?, disc.discretize_rows(test_set.x.view())?))
    })?;
    let (xtr, xte) = time_stage(timings, stage::ENCODE, || -> CliResult<_> {
        Ok((encode(cfg.backend, cb, train_bins.view())?, encode(cfg.backend, cb, test_bins.view())?))
    })?;

    let mut out = FoldOutput {
        classical: None,
        online: None,
    };
    if cfg.training.classical() {
        let m = time_stage(timings, stage::TRAIN_CLASSICAL, || train_classical(cfg, &xtr, &train_set.y, classes))?;
        out.classical = Some(time_stage(timings, stage::PREDICT, || predict(&m, &xte))?);
    }
    if cfg.training.online() {
        let m = time_stage(timings, stage::TRAIN_ONLINE, || train_online(cfg, &xtr, &train_set.y, classes))?;
        out.online = Some(time_stage(timings, stage::PREDICT, || predict(&m, &xte))?);
    }
    Ok(out)
}

/// Runs `f` on a pool of `threads` workers, or the global pool when unset.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
