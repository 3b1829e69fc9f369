use crate::artifacts;
use crate::bench::run_bench;
use crate::config::{Backend, ExperimentConfig, SplitMode, TrainingMode};
use crate::error::{exit, CliError, CliResult};
use crate::experiment::{run_experiment, write_json};
use crate::sweep::{run_sweep, write_sweep_csv, SweepAxis};
use clap::{Args, Parser, Subcommand};
use hypervec::data::{save_csv, synthesize, SyntheticSpec};
use hypervec::{BindingStrategy, GenerationStrategy, Metric};
use std::ffi::OsString;
use std::path::PathBuf;

pub const SEED_ENV: &str = "HYPERVEC_SEED";

#[derive(Debug, Parser)]
#[command(name = "hypervec", version, about = "Bit-packed hyperdimensional classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the discretizer, build the codebook and write encoded hypervectors.
    Encode(ConfigArgs),
    /// Train classical and/or online models on the whole dataset.
    Train(ConfigArgs),
    /// Predict a dataset with models written by `train`.
    Predict {
        /// Directory holding the output of `train`.
        #[arg(long)]
        model_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Cross-validated run: metrics.json, predictions.csv, splits.json, timings.json.
    Experiment(ConfigArgs),
    /// One experiment per value of `--axis`; writes sweep.csv.
    Sweep {
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values, at least two.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Packed vs naive backend timings with output equality check.
    Bench(ConfigArgs),
    /// Write a seeded synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature CSV with a header.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    segment_column: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    /// random, scale_random or sandwich.
    #[arg(long)]
    generation: Option<GenerationStrategy>,
    /// id_level, permutation or appending.
    #[arg(long)]
    binding: Option<BindingStrategy>,
    /// hamming or cosine.
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// classical, online or both.
    #[arg(long)]
    training: Option<TrainingMode>,
    /// Falls back to the config file, then HYPERVEC_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// packed or naive.
    #[arg(long)]
    backend: Option<Backend>,
    /// tscv, loso or single.
    #[arg(long)]
    split: Option<SplitMode>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    subsample_factor: Option<usize>,
    #[arg(long)]
    positive_class: Option<usize>,
    /// Odd window in samples; 1 disables smoothing.
    #[arg(long)]
    smooth_window: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 30)]
    features: usize,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    #[arg(long, default_value_t = 0.25)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    segments: usize,
    #[arg(long, default_value_t = 1)]
    run_length: usize,
    /// Comma-separated relative class frequencies.
    #[arg(long, value_delimiter = ',')]
    class_weights: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

impl ConfigArgs {
    fn resolve(self, env_seed: Option<&str>) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.data {
            c.dataset = Some(v);
            c.synthetic = None;
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { c.$field = v; })* };
        }
        set!(
            label_column, dim, bins, generation, binding, metric, gamma, batch_size, training, backend, split,
            train_fraction, positive_class, smooth_window, out
        );
        if self.segment_column.is_some() {
            c.segment_column = self.segment_column;
        }
        if self.subsample_factor.is_some() {
            c.subsample_factor = self.subsample_factor;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.seed = Some(resolve_seed(self.seed.or(c.seed), env_seed)?);
        c.validate()?;
        Ok(c)
    }
}

fn resolve_seed(explicit: Option<u64>, env_seed: Option<&str>) -> CliResult<u64> {
    match (explicit, env_seed) {
        (Some(s), _) => Ok(s),
        (None, Some(text)) => text
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV}='{text}' is not an unsigned integer"))),
        (None, None) => Ok(0),
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match dispatch(cli.command, env_seed.as_deref()) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("hypervec: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, env_seed: Option<&str>) -> CliResult<()> {
    match command {
        Command::Encode(a) => {
            for p in artifacts::encode(&a.resolve(env_seed)?)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Train(a) => {
            for p in artifacts::train(&a.resolve(env_seed)?)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Predict { model_dir, config } => {
            let cfg = config.resolve(env_seed)?;
            for (name, r) in artifacts::predict(&cfg, &model_dir)? {
                println!("{name}: accuracy {:.4}", r.accuracy);
            }
        }
        Command::Experiment(a) => {
            let cfg = a.resolve(env_seed)?;
            let out = run_experiment(&cfg)?;
            out.write(&cfg.out)?;
            let r = &out.report;
            println!("{} folds, {} of {} samples evaluated", r.folds, r.evaluated, r.samples);
            for (name, m) in [("classical", &r.classical), ("online", &r.online)] {
                if let Some(m) = m {
                    let f1 = m.raw.f1.map_or_else(|| "n/a".to_string(), |f| format!("{f:.4}"));
                    println!("{name}: accuracy {:.4} f1 {f1}", m.raw.accuracy);
                }
            }
            println!("wrote {}", cfg.out.display());
        }
        Command::Sweep { axis, values, config } => {
            let cfg = config.resolve(env_seed)?;
            let rows = run_sweep(&cfg, axis, &values)?;
            std::fs::create_dir_all(&cfg.out)?;
            let path = cfg.out.join("sweep.csv");
            write_sweep_csv(axis, &rows, std::fs::File::create(&path)?)?;
            write_sweep_csv(axis, &rows, std::io::stdout().lock())?;
            println!("wrote {}", path.display());
        }
        Command::Bench(a) => {
            let cfg = a.resolve(env_seed)?;
            let report = run_bench(&cfg)?;
            std::fs::create_dir_all(&cfg.out)?;
            write_json(&cfg.out.join("bench.json"), &report)?;
            print!("{report}");
        }
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                classes: a.classes,
                features: a.features,
                samples: a.samples,
                noise: a.noise,
                segments: a.segments,
                run_length: a.run_length,
                class_weights: a.class_weights,
                seed: resolve_seed(a.seed, env_seed)?,
            };
            let d = synthesize(&spec).map_err(|e| CliError::usage(e.to_string()))?;
            if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            save_csv(&d, &a.out)?;
            println!("wrote {} ({} rows)", a.out.display(), d.len());
        }
    }
    Ok(())
}
