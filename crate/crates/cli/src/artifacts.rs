//! `encode`, `train` and `predict`: the pipeline stages as standalone
//! commands exchanging files.

use crate::config::{Backend, ExperimentConfig, TrainingMode};
use crate::error::{CliError, CliResult};
use crate::experiment::write_json;
use crate::pipeline::{self, load_dataset};
use hypervec::eval::{sample_metrics, EvalReport};
use hypervec::hypervector::{read_container, write_container};
use hypervec::{Codebook, Discretizer, HdModel, PackedBitMatrix};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

pub const DISCRETIZER_FILE: &str = "discretizer.json";
pub const CODEBOOK_FILE: &str = "codebook.hvcb";
pub const ENCODED_FILE: &str = "encoded.hvpb";

pub fn model_file(mode: TrainingMode) -> String {
    format!("model_{mode}.hvmd")
}

fn packed_only(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.backend != Backend::Packed {
        return Err(CliError::usage("encode/train/predict run on the packed backend only"));
    }
    cfg.validate()
}

struct Encoded {
    disc: Discretizer,
    codebook: Codebook,
    x: PackedBitMatrix,
    y: Vec<usize>,
}

fn fit_and_encode(cfg: &ExperimentConfig) -> CliResult<Encoded> {
    let d = load_dataset(cfg)?;
    let disc = Discretizer::fit(d.x.view(), cfg.bins)?;
    let codebook = pipeline::codebook(cfg, d.feature_count())?;
    let bins = disc.discretize_rows(d.x.view())?;
    let x = codebook.encode_batch(bins.view(), codebook.tiebreak().row(0))?;
    Ok(Encoded {
        disc,
        codebook,
        x,
        y: d.y,
    })
}

fn write_encoder(dir: &Path, e: &Encoded) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join(DISCRETIZER_FILE), &e.disc)?;
    e.codebook.write(BufWriter::new(File::create(dir.join(CODEBOOK_FILE))?))?;
    Ok(())
}

/// Fits the discretizer on the whole dataset and writes it, the codebook and
/// the encoded hypervectors. Returns the written paths.
pub fn encode(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    pipeline::with_threads(cfg.threads, || {
        packed_only(cfg)?;
        let e = fit_and_encode(cfg)?;
        write_encoder(&cfg.out, &e)?;
        let path = cfg.out.join(ENCODED_FILE);
        write_container(&e.x, BufWriter::new(File::create(&path)?))?;
        Ok(vec![cfg.out.join(DISCRETIZER_FILE), cfg.out.join(CODEBOOK_FILE), path])
    })?
}

/// Trains on the whole dataset; writes the encoder files and one model file
/// per enabled training mode.
pub fn train(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    pipeline::with_threads(cfg.threads, || {
        packed_only(cfg)?;
        let e = fit_and_encode(cfg)?;
        write_encoder(&cfg.out, &e)?;
        let classes = e.y.iter().max().map_or(0, |&m| m + 1).max(cfg.positive_class + 1);
        let mc = pipeline::model_config(cfg);
        let mut written = vec![cfg.out.join(DISCRETIZER_FILE), cfg.out.join(CODEBOOK_FILE)];
        for mode in [TrainingMode::Classical, TrainingMode::Online] {
            let enabled = match mode {
                TrainingMode::Classical => cfg.training.classical(),
                _ => cfg.training.online(),
            };
            if !enabled {
                continue;
            }
            let mut model = match mode {
                TrainingMode::Classical => HdModel::train_classical(&e.x, &e.y, classes, &mc)?,
                _ => HdModel::train_online(&e.x, &e.y, classes, cfg.batch_size, &mc)?,
            };
            model.provenance = BTreeMap::from([
                ("training".to_string(), mode.to_string()),
                ("batch_size".to_string(), cfg.batch_size.to_string()),
                ("generation".to_string(), cfg.generation.to_string()),
                ("binding".to_string(), cfg.binding.to_string()),
                ("bins".to_string(), cfg.bins.to_string()),
            ]);
            let path = cfg.out.join(model_file(mode));
            model.write(BufWriter::new(File::create(&path)?))?;
            written.push(path);
        }
        Ok(written)
    })?
}

/// Loads the encoder and every model found in `model_dir`, predicts the
/// configured dataset and writes `predictions.csv` and `metrics.json`.
pub fn predict(cfg: &ExperimentConfig, model_dir: &Path) -> CliResult<BTreeMap<String, EvalReport>> {
    pipeline::with_threads(cfg.threads, || {
        packed_only(cfg)?;
        let open = |name: &str| -> CliResult<BufReader<File>> {
            let p = model_dir.join(name);
            File::open(&p)
                .map(BufReader::new)
                .map_err(|e| CliError::usage(format!("cannot open {}: {e}", p.display())))
        };
        let disc: Discretizer = serde_json::from_reader(open(DISCRETIZER_FILE)?)?;
        let codebook = Codebook::read(open(CODEBOOK_FILE)?)?;
        let mut models = Vec::new();
        for mode in [TrainingMode::Classical, TrainingMode::Online] {
            if model_dir.join(model_file(mode)).exists() {
                models.push((mode.to_string(), HdModel::read(open(&model_file(mode))?)?));
            }
        }
        if models.is_empty() {
            return Err(CliError::usage(format!("no model files in {}", model_dir.display())));
        }
        let d = load_dataset(cfg)?;
        let bins = disc.discretize_rows(d.x.view())?;
        let x = codebook.encode_batch(bins.view(), codebook.tiebreak().row(0))?;

        let mut preds = Vec::new();
        let mut metrics = BTreeMap::new();
        for (name, m) in &models {
            let labels = m.predict_labels(&x)?;
            metrics.insert(name.clone(), sample_metrics(&labels, &d.y, cfg.positive_class)?);
            preds.push((name.clone(), labels));
        }
        std::fs::create_dir_all(&cfg.out)?;
        let mut w = csv::Writer::from_path(cfg.out.join(crate::experiment::PREDICTIONS_FILE))?;
        let mut header = vec!["index".to_string(), "truth".to_string()];
        header.extend(preds.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for i in 0..d.len() {
            let mut row = vec![i.to_string(), d.y[i].to_string()];
            row.extend(preds.iter().map(|(_, p)| p[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        write_json(&cfg.out.join(crate::experiment::METRICS_FILE), &metrics)?;
        Ok(metrics)
    })?
}

/// Reads an encoded container written by [`encode`].
pub fn read_encoded(path: &Path) -> CliResult<PackedBitMatrix> {
    Ok(read_container(BufReader::new(File::open(path)?))?)
}
