use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiment::{run_experiment, ModelReport};
use crate::pipeline::stage;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Dim,
    Batch,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dim => "dim",
            Self::Batch => "batch",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "dim" => Ok(Self::Dim),
            "batch" | "batch_size" | "batch-size" => Ok(Self::Batch),
            _ => Err(CliError::usage(format!("unknown sweep axis '{s}' (expected dim, batch)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: usize,
    /// `ok`, or the error that stopped this run.
    pub status: String,
    pub classical: Option<ModelReport>,
    pub online: Option<ModelReport>,
    pub timings: Vec<(String, f64)>,
}

pub const TIMING_COLUMNS: [&str; 5] = [
    stage::DISCRETIZE,
    stage::ENCODE,
    stage::TRAIN_CLASSICAL,
    stage::TRAIN_ONLINE,
    stage::PREDICT,
];

/// One experiment per value with everything else held fixed. A failing
/// value is recorded and the sweep moves on.
pub fn run_sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[usize]) -> CliResult<Vec<SweepRow>> {
    if values.len() < 2 {
        return Err(CliError::usage(format!(
            "a sweep needs at least 2 values, got {}",
            values.len()
        )));
    }
    cfg.validate()?;
    Ok(values
        .iter()
        .map(|&value| {
            let mut run_cfg = cfg.clone();
            match axis {
                SweepAxis::Dim => run_cfg.dim = value,
                SweepAxis::Batch => run_cfg.batch_size = value,
            }
            match run_experiment(&run_cfg) {
                Ok(out) => SweepRow {
                    value,
                    status: "ok".into(),
                    classical: out.report.classical,
                    online: out.report.online,
                    timings: TIMING_COLUMNS
                        .iter()
                        .map(|&s| (s.to_string(), out.timings.get(s).unwrap_or(0.0)))
                        .collect(),
                },
                Err(e) => SweepRow {
                    value,
                    status: format!("error: {e}"),
                    classical: None,
                    online: None,
                    timings: Vec::new(),
                },
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(axis: SweepAxis, rows: &[SweepRow], w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![axis.to_string(), "status".into()];
    for model in ["classical", "online"] {
        for metric in ["accuracy", "f1"] {
            header.push(format!("{model}_{metric}"));
        }
    }
    header.extend(TIMING_COLUMNS.iter().map(|s| format!("{s}_seconds")));
    out.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.value.to_string(), r.status.clone()];
        for m in [&r.classical, &r.online] {
            let raw = m.as_ref().map(|m| &m.raw);
            row.push(raw.map_or_else(String::new, |e| e.accuracy.to_string()));
            row.push(raw.and_then(|e| e.f1).map_or_else(String::new, |f| f.to_string()));
        }
        if r.timings.is_empty() {
            row.extend(TIMING_COLUMNS.iter().map(|_| String::new()));
        } else {
            row.extend(r.timings.iter().map(|(_, t)| format!("{t:.6}")));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypervec::data::SyntheticSpec;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            synthetic: Some(SyntheticSpec {
                samples: 200,
                features: 5,
                ..Default::default()
            }),
            dim: 512,
            ..Default::default()
        }
    }

    #[test]
    fn needs_two_values() {
        assert!(matches!(run_sweep(&cfg(), SweepAxis::Dim, &[]), Err(CliError::Usage(_))));
        assert!(matches!(run_sweep(&cfg(), SweepAxis::Dim, &[512]), Err(CliError::Usage(_))));
    }

    #[test]
    fn failures_are_marked_and_sweep_continues() {
        let rows = run_sweep(&cfg(), SweepAxis::Batch, &[0, 4]).unwrap();
        assert!(rows[0].status.starts_with("error"));
        assert_eq!(rows[1].status, "ok");
        let mut buf = Vec::new();
        write_sweep_csv(SweepAxis::Batch, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("batch,status,classical_accuracy"));
    }

    #[test]
    fn axis_names() {
        assert_eq!("dim".parse::<SweepAxis>().unwrap(), SweepAxis::Dim);
        assert!("depth".parse::<SweepAxis>().is_err());
    }
}
