use crate::error::{CliError, CliResult};
use hypervec::data::{CsvSchema, SyntheticSpec};
use hypervec::{BindingStrategy, GenerationStrategy, Metric};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub const fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = CliError;

            fn from_str(s: &str) -> CliResult<Self> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s.to_ascii_lowercase())
                    .ok_or_else(|| {
                        let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
                        CliError::usage(format!("unknown {} '{s}' (expected {})", stringify!($name), names.join(", ")))
                    })
            }
        }
    };
}

named_enum!(
    /// Packed kernels or the byte-per-bit reference.
    Backend { Packed => "packed", Naive => "naive" }
);

named_enum!(
    SplitMode { Tscv => "tscv", Loso => "loso", Single => "single" }
);

named_enum!(
    /// Which classifiers an experiment trains.
    TrainingMode { Classical => "classical", Online => "online", Both => "both" }
);

impl TrainingMode {
    pub fn classical(self) -> bool {
        matches!(self, Self::Classical | Self::Both)
    }

    pub fn online(self) -> bool {
        matches!(self, Self::Online | Self::Both)
    }
}

/// Everything an experiment needs. Loaded from a JSON file, then overridden
/// by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Feature CSV. Exactly one of `dataset` and `synthetic` must be set.
    pub dataset: Option<PathBuf>,
    pub label_column: String,
    pub segment_column: Option<String>,
    pub synthetic: Option<SyntheticSpec>,
    pub dim: usize,
    pub bins: usize,
    pub generation: GenerationStrategy,
    pub binding: BindingStrategy,
    pub metric: Metric,
    pub gamma: f64,
    pub batch_size: usize,
    pub training: TrainingMode,
    pub split: SplitMode,
    /// Training share of the chronological holdout used by `single`.
    pub train_fraction: f64,
    pub subsample_factor: Option<usize>,
    /// Class treated as positive for TPR/PPV/F1, smoothing and episodes;
    /// also the minority class for subsampling.
    pub positive_class: usize,
    /// Smoothing window in samples (odd); 1 disables smoothing.
    pub smooth_window: usize,
    /// Unset means `HYPERVEC_SEED`, else 0 (resolved by the CLI).
    pub seed: Option<u64>,
    pub backend: Backend,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            label_column: "label".into(),
            segment_column: None,
            synthetic: None,
            dim: 10240,
            bins: 10,
            generation: GenerationStrategy::ScaleRandom,
            binding: BindingStrategy::IdLevel,
            metric: Metric::Hamming,
            gamma: 1.0,
            batch_size: 1,
            training: TrainingMode::Both,
            split: SplitMode::Single,
            train_fraction: 0.75,
            subsample_factor: None,
            positive_class: 1,
            smooth_window: 11,
            seed: None,
            backend: Backend::Packed,
            threads: None,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column.clone(),
            segment_column: self.segment_column.clone(),
        }
    }

    /// Checks every field that can be checked without reading the data.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        match (&self.dataset, &self.synthetic) {
            (None, None) => return bad("no dataset: set `dataset` or `synthetic`".into()),
            (Some(_), Some(_)) => return bad("set only one of `dataset` and `synthetic`".into()),
            _ => {}
        }
        if self.dim == 0 {
            return bad("dim must be >= 1".into());
        }
        if self.bins < 2 {
            return bad(format!("bins must be >= 2, got {}", self.bins));
        }
        match self.generation {
            GenerationStrategy::ScaleRandom if self.dim < 2 * (self.bins - 1) => {
                return bad(format!(
                    "scale_random with {} bins needs dim >= {}",
                    self.bins,
                    2 * (self.bins - 1)
                ))
            }
            GenerationStrategy::Sandwich if !self.dim.is_multiple_of(2) => {
                return bad(format!("sandwich needs an even dim, got {}", self.dim))
            }
            _ => {}
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if self.subsample_factor == Some(0) {
            return bad("subsample factor must be >= 1".into());
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return bad(format!("smooth window must be odd, got {}", self.smooth_window));
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        if matches!(self.split, SplitMode::Tscv | SplitMode::Loso)
            && self.dataset.is_some()
            && self.segment_column.is_none()
        {
            return bad(format!("split '{}' needs a segment column", self.split));
        }
        Ok(())
    }

    /// The fields that determine results, for embedding in reports.
    pub fn provenance(&self) -> ReportConfig {
        ReportConfig {
            dataset: self.dataset.as_ref().map(|p| p.display().to_string()),
            synthetic: self.synthetic.clone(),
            dim: self.dim,
            bins: self.bins,
            generation: self.generation,
            binding: self.binding,
            metric: self.metric,
            gamma: self.gamma,
            batch_size: self.batch_size,
            training: self.training,
            split: self.split,
            train_fraction: self.train_fraction,
            subsample_factor: self.subsample_factor,
            positive_class: self.positive_class,
            smooth_window: self.smooth_window,
            seed: self.seed(),
            backend: self.backend,
        }
    }
}

/// Result-determining subset of [`ExperimentConfig`] (no output path or
/// thread count).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub dataset: Option<String>,
    pub synthetic: Option<SyntheticSpec>,
    pub dim: usize,
    pub bins: usize,
    pub generation: GenerationStrategy,
    pub binding: BindingStrategy,
    pub metric: Metric,
    pub gamma: f64,
    pub batch_size: usize,
    pub training: TrainingMode,
    pub split: SplitMode,
    pub train_fraction: f64,
    pub subsample_factor: Option<usize>,
    pub positive_class: usize,
    pub smooth_window: usize,
    pub seed: u64,
    pub backend: Backend,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid() -> ExperimentConfig {
        ExperimentConfig {
            synthetic: Some(SyntheticSpec::default()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_validate_with_a_dataset() {
        assert!(ExperimentConfig::default().validate().is_err());
        valid().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let cases = [
            ExperimentConfig { dim: 0, ..valid() },
            ExperimentConfig { bins: 1, ..valid() },
            ExperimentConfig { batch_size: 0, ..valid() },
            ExperimentConfig { gamma: -0.1, ..valid() },
            ExperimentConfig { smooth_window: 4, ..valid() },
            ExperimentConfig { generation: GenerationStrategy::Sandwich, dim: 101, ..valid() },
            ExperimentConfig { dataset: Some("x.csv".into()), ..valid() },
            ExperimentConfig { subsample_factor: Some(0), ..valid() },
            ExperimentConfig {
                dataset: Some("x.csv".into()),
                synthetic: None,
                split: SplitMode::Tscv,
                ..valid()
            },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(CliError::Usage(_))), "{c:?}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), *b);
        }
        assert!("gpu".parse::<Backend>().is_err());
        assert_eq!("LOSO".parse::<SplitMode>().unwrap(), SplitMode::Loso);
    }

    #[test]
    fn file_rejects_unknown_keys_and_strategies() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"dim": 2048, "generation": "sandwich"}"#).unwrap();
        let c = ExperimentConfig::from_file(&p).unwrap();
        assert_eq!((c.dim, c.generation), (2048, GenerationStrategy::Sandwich));
        std::fs::write(&p, r#"{"dimension": 2048}"#).unwrap();
        assert!(ExperimentConfig::from_file(&p).is_err());
        std::fs::write(&p, r#"{"binding": "fancy"}"#).unwrap();
        assert!(ExperimentConfig::from_file(&p).is_err());
    }
}
