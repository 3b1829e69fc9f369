//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so that criteria execute in a
//! fixed order with their measurements printed; exits non-zero if any fail.

use hypervec::data::{subsample_factor, tscv_folds, Dataset, SyntheticSpec};
use hypervec::encoding::generate_random;
use hypervec::hypervector::{horizontal_sum, majority_binarize, rotate, transpose, vertical_sum, xor_bind};
use hypervec::model::hamming_distance;
use hypervec::reference::{
    naive_hamming, naive_hsum, naive_majority, naive_rotate, naive_transpose, naive_vsum, naive_xor, DenseBitMatrix,
};
use hypervec::{
    sub_seed, BindingStrategy, Codebook, GenerationStrategy, HdModel, Metric, ModelConfig, PackedBitMatrix,
};
use hypervec_cli::config::TrainingMode;
use hypervec_cli::pipeline::stage;
use hypervec_cli::{run_bench, run_experiment, run_sweep, ExperimentConfig, SweepAxis};
use ndarray::Array2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Deterministic stream of integers for case generation.
struct Cases(u64);

impl Cases {
    fn next(&mut self, below: u64) -> u64 {
        self.0 += 1;
        sub_seed(self.0, 0xACCE) % below
    }

    /// Log-uniform in `1..=max`, so small and large sizes both appear.
    fn size(&mut self, max: usize) -> usize {
        let u = self.next(1 << 20) as f64 / (1u64 << 20) as f64;
        ((max as f64).powf(u).floor() as usize).clamp(1, max)
    }
}

const KERNEL_DIMS: [usize; 8] = [1, 31, 32, 33, 1000, 1024, 10239, 10240];
const CASES_PER_KERNEL: usize = 1000;

fn kernel_oracle_equivalence() -> Outcome {
    let mut cases = Cases(1);
    let mut checked = [0usize; 7];
    for case in 0..CASES_PER_KERNEL {
        let dim = KERNEL_DIMS[case % KERNEL_DIMS.len()];
        let n = cases.size(1000);
        let seed = case as u64 * 7919;
        let a = generate_random(n, dim, seed).unwrap();
        let da = DenseBitMatrix::from_packed(&a);

        // xor, alternating full and broadcast operands
        let b = generate_random(if case % 2 == 0 { n } else { 1 }, dim, seed + 1).unwrap();
        let got = DenseBitMatrix::from_packed(&xor_bind(&a, &b).unwrap());
        ensure!(got == naive_xor(&da, &DenseBitMatrix::from_packed(&b)).unwrap(), "xor case {case} D={dim} n={n}");
        checked[0] += 1;

        let shift = cases.next(3 * dim as u64 + 1) as usize;
        ensure!(
            DenseBitMatrix::from_packed(&rotate(&a, shift)) == naive_rotate(&da, shift),
            "rotate case {case} D={dim} n={n} shift={shift}"
        );
        checked[1] += 1;

        ensure!(horizontal_sum(&a).to_vec() == naive_hsum(&da), "hsum case {case} D={dim} n={n}");
        checked[2] += 1;

        let counts = vertical_sum(&a);
        ensure!(counts.to_vec() == naive_vsum(&da), "vsum case {case} D={dim} n={n}");
        checked[3] += 1;

        ensure!(
            DenseBitMatrix::from_packed(&transpose(&a).unwrap()) == naive_transpose(&da),
            "transpose case {case} D={dim} n={n}"
        );
        checked[4] += 1;

        let tb = generate_random(1, dim, seed + 2).unwrap();
        let packed = majority_binarize(&counts, n, tb.row(0)).unwrap().unpack();
        let naive = naive_majority(&counts, n, DenseBitMatrix::from_packed(&tb).row(0)).unwrap();
        ensure!(packed == naive, "majority case {case} D={dim} n={n}");
        checked[5] += 1;

        let c = generate_random(n, dim, seed + 3).unwrap();
        let dc = DenseBitMatrix::from_packed(&c);
        for r in 0..n {
            let p = hamming_distance(a.row(r), c.row(r)).unwrap();
            ensure!(p == naive_hamming(da.row(r), dc.row(r)).unwrap(), "hamming case {case} row {r} D={dim}");
        }
        checked[6] += 1;
    }
    Ok(format!(
        "xor/rotate/hsum/vsum/transpose/majority/hamming: {:?} cases, 0 mismatches",
        checked
    ))
}

fn memory_contract() -> Outcome {
    for &(n, dim) in &[(1, 1), (3, 31), (10, 32), (7, 33), (100, 1000), (1000, 10240), (5, 10239)] {
        let m = PackedBitMatrix::zeros(n, dim);
        let expected = n * dim.div_ceil(32) * 4;
        ensure!(m.storage_bytes() == expected, "n={n} D={dim}: {} bytes, expected {expected}", m.storage_bytes());
        ensure!(m.words().len() * 4 == expected, "word count n={n} D={dim}");
        let dense = DenseBitMatrix::zeros(n, dim).storage_bytes();
        ensure!(dense == n * dim, "dense footprint n={n} D={dim}");
        if dim % 32 == 0 {
            ensure!(dense == 8 * expected, "ratio n={n} D={dim}: {dense} vs {expected}");
        }
    }
    Ok("storage == n*ceil(D/32)*4 bytes; 8x below one byte per bit for D % 32 == 0".into())
}

fn encode_brute_force() -> Outcome {
    let (features, bins, dim) = (3, 2, 16);
    let mut combos = 0;
    for generation in [GenerationStrategy::Random, GenerationStrategy::ScaleRandom, GenerationStrategy::Sandwich] {
        for seed in 0..4 {
            let cb = Codebook::generate(features, bins, dim, generation, BindingStrategy::IdLevel, seed).unwrap();
            let tb = cb.tiebreak();
            for code in 0..(1usize << features) {
                let b: Vec<usize> = (0..features).map(|f| (code >> f) & 1).collect();
                let got = cb.encode(&b, tb.row(0)).unwrap();
                for j in 0..dim {
                    let count: usize = (0..features)
                        .map(|f| usize::from(cb.id_vectors().get(f, j) ^ cb.value_vectors().get(b[f], j)))
                        .sum();
                    // F = 3 is odd, so no ties
                    let expected = 2 * count > features;
                    ensure!(got.get(0, j) == expected, "{generation} seed {seed} bins {b:?} bit {j}");
                }
                combos += 1;
            }
        }
    }
    Ok(format!("{combos} encodings (8 bin combinations x 3 generators x 4 seeds) match exhaustive evaluation"))
}

/// Per-element application of the online rules against a frozen copy.
#[allow(clippy::too_many_arguments)]
fn scalar_online(
    acc: &mut [f64],
    totals: &mut [f64],
    frozen_vectors: &PackedBitMatrix,
    frozen_acc: &[f64],
    batch: &PackedBitMatrix,
    labels: &[usize],
    metric: Metric,
    gamma: f64,
) {
    let (classes, dim) = (frozen_vectors.rows(), batch.dim());
    for (i, &truth) in labels.iter().enumerate() {
        let mut scores = vec![0.0; classes];
        for (c, score) in scores.iter_mut().enumerate() {
            *score = match metric {
                Metric::Hamming => {
                    (0..dim).filter(|&j| batch.get(i, j) != frozen_vectors.get(c, j)).count() as f64 / dim as f64
                }
                Metric::Cosine => {
                    let row = &frozen_acc[c * dim..(c + 1) * dim];
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let ones = (0..dim).filter(|&j| batch.get(i, j)).count();
                    let dot: f64 = (0..dim).filter(|&j| batch.get(i, j)).map(|j| row[j]).sum();
                    if norm == 0.0 || ones == 0 {
                        0.0
                    } else {
                        dot / (norm * (ones as f64).sqrt())
                    }
                }
            };
        }
        let mut predicted = 0;
        for c in 1..classes {
            let better = match metric {
                Metric::Hamming => scores[c] < scores[predicted],
                Metric::Cosine => scores[c] > scores[predicted],
            };
            if better {
                predicted = c;
            }
        }
        let delta = |s: f64| match metric {
            Metric::Hamming => s,
            Metric::Cosine => (1.0 - s).clamp(0.0, 1.0),
        };
        let delta_c = delta(scores[truth]);
        for j in 0..dim {
            if batch.get(i, j) {
                acc[truth * dim + j] += delta_c;
            }
        }
        totals[truth] += delta_c;
        if predicted != truth {
            let penalty = gamma * (1.0 - delta(scores[predicted]));
            for j in 0..dim {
                if batch.get(i, j) {
                    acc[predicted * dim + j] -= penalty;
                }
            }
        }
    }
}

fn online_scalar_oracle() -> Outcome {
    let mut cases = Cases(4);
    let mut max_err = 0.0f64;
    for case in 0..60u64 {
        let dim = 1 + cases.next(2048) as usize;
        let k = 1 + cases.next(64) as usize;
        let classes = 2 + cases.next(4) as usize;
        let metric = if case % 2 == 0 { Metric::Hamming } else { Metric::Cosine };
        let gamma = [1.0, 0.5, 0.0, 1.7][case as usize % 4];
        let cfg = ModelConfig {
            metric,
            learning_rate: gamma,
            seed: case,
        };
        let boot = generate_random(20, dim, case).unwrap();
        let boot_labels: Vec<usize> = (0..20).map(|_| cases.next(classes as u64) as usize).collect();
        let mut m = HdModel::train_classical(&boot, &boot_labels, classes, &cfg).unwrap();
        // one warm-up batch so accumulators hold fractional values
        for round in 0..2 {
            let batch = generate_random(k, dim, 1000 * case + round).unwrap();
            let labels: Vec<usize> = (0..k).map(|_| cases.next(classes as u64) as usize).collect();
            let mut acc = m.accumulators().to_vec();
            let mut totals = m.weight_totals().to_vec();
            let snap = m.snapshot();
            scalar_online(&mut acc, &mut totals, snap.class_vectors(), m.accumulators(), &batch, &labels, metric, gamma);
            m.online_update(&batch, &labels, &snap).unwrap();
            for (a, b) in m.accumulators().iter().zip(&acc).chain(m.weight_totals().iter().zip(&totals)) {
                max_err = max_err.max((a - b).abs());
                ensure!((a - b).abs() <= 1e-9, "case {case}: accumulator {a} vs scalar {b}");
            }
        }
    }

    // delta_C = 0: a correctly classified sample equal to its class vector
    let x = generate_random(3, 777, 5).unwrap();
    let cfg = ModelConfig::default();
    let mut m = HdModel::train_classical(&x, &[0, 1, 2], 3, &cfg).unwrap();
    let before = m.clone();
    let snap = m.snapshot();
    m.online_update(&x.slice_rows(1, 2), &[1], &snap).unwrap();
    ensure!(
        m.accumulators() == before.accumulators()
            && m.weight_totals() == before.weight_totals()
            && m.class_vectors() == before.class_vectors(),
        "delta_C = 0 changed the learned state"
    );

    // gamma = 0: the wrongly predicted class is untouched
    let cfg = ModelConfig {
        learning_rate: 0.0,
        ..cfg
    };
    let mut m = HdModel::train_classical(&x, &[0, 1, 2], 3, &cfg).unwrap();
    let before = m.clone();
    let snap = m.snapshot();
    m.online_update(&x.slice_rows(0, 1), &[2], &snap).unwrap();
    ensure!(m.accumulator(0) == before.accumulator(0), "gamma = 0 changed the wrong class");
    ensure!(m.accumulator(2) != before.accumulator(2), "gamma = 0 skipped the true class");
    Ok(format!("120 random batches within 1e-9 (max error {max_err:e}); both no-op cases exact"))
}

fn synthetic(samples: usize) -> SyntheticSpec {
    SyntheticSpec {
        classes: 5,
        features: 30,
        samples,
        seed: 2024,
        ..Default::default()
    }
}

fn accuracy_ordering() -> Outcome {
    let cfg = ExperimentConfig {
        synthetic: Some(synthetic(5000)),
        dim: 10240,
        batch_size: 1,
        gamma: 1.0,
        ..Default::default()
    };
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let classical = out.report.classical.unwrap().raw.accuracy;
    let online = out.report.online.unwrap().raw.accuracy;
    ensure!(classical >= 0.90, "classical accuracy {classical:.4} < 0.90");
    ensure!(online >= classical - 0.01, "online {online:.4} < classical {classical:.4} - 1pp");
    Ok(format!("classical {classical:.4} >= 0.90, online (B=1, gamma=1) {online:.4}"))
}

fn training_seconds(row: &hypervec_cli::sweep::SweepRow) -> f64 {
    row.timings
        .iter()
        .filter(|(s, _)| s == stage::TRAIN_CLASSICAL || s == stage::TRAIN_ONLINE)
        .map(|(_, t)| t)
        .sum()
}

fn dim_sweep() -> Outcome {
    let cfg = ExperimentConfig {
        synthetic: Some(synthetic(5000)),
        batch_size: 1,
        ..Default::default()
    };
    let rows = run_sweep(&cfg, SweepAxis::Dim, &[1024, 10240]).map_err(|e| e.to_string())?;
    ensure!(rows.iter().all(|r| r.status == "ok"), "sweep failed: {:?}", rows.iter().map(|r| &r.status).collect::<Vec<_>>());
    let (small, large) = (&rows[0], &rows[1]);
    let ratio = training_seconds(small) / training_seconds(large);
    ensure!(ratio < 0.5, "training time ratio D=1024/D=10240 is {ratio:.3}");
    let mut accs = Vec::new();
    for (name, pick) in [("classical", 0), ("online", 1)] {
        let acc = |r: &hypervec_cli::sweep::SweepRow| {
            let m = if pick == 0 { &r.classical } else { &r.online };
            m.as_ref().unwrap().raw.accuracy
        };
        let (a_small, a_large) = (acc(small), acc(large));
        ensure!(a_small >= a_large - 0.10, "{name}: D=1024 accuracy {a_small:.4} vs D=10240 {a_large:.4}");
        accs.push(format!("{name} {a_small:.4}/{a_large:.4}"));
    }
    Ok(format!("train time ratio {ratio:.3} < 0.5; accuracy D=1024/D=10240: {}", accs.join(", ")))
}

fn batch_sweep() -> Outcome {
    let cfg = ExperimentConfig {
        synthetic: Some(synthetic(20000)),
        training: TrainingMode::Online,
        ..Default::default()
    };
    let rows = run_sweep(&cfg, SweepAxis::Batch, &[1, 1024]).map_err(|e| e.to_string())?;
    ensure!(rows.iter().all(|r| r.status == "ok"), "sweep failed");
    let t = |r: &hypervec_cli::sweep::SweepRow| training_seconds(r);
    let ratio = t(&rows[1]) / t(&rows[0]);
    ensure!(ratio < 0.7, "online training time ratio B=1024/B=1 is {ratio:.3}");
    let acc = |r: &hypervec_cli::sweep::SweepRow| r.online.as_ref().unwrap().raw.accuracy;
    let (a1, a1024) = (acc(&rows[0]), acc(&rows[1]));
    ensure!(a1024 >= a1 - 0.10, "accuracy B=1024 {a1024:.4} vs B=1 {a1:.4}");
    Ok(format!("time ratio {ratio:.3} < 0.7; accuracy B=1 {a1:.4}, B=1024 {a1024:.4}"))
}

fn backend_speedup() -> Outcome {
    let cfg = ExperimentConfig {
        synthetic: Some(synthetic(10000)),
        train_fraction: 0.5,
        metric: Metric::Hamming,
        ..Default::default()
    };
    // run_bench fails with a backend-mismatch error (exit code 3 from the
    // CLI) unless every encoded bit and predicted label agrees
    let report = run_bench(&cfg).map_err(|e| format!("{e} (exit code {})", e.exit_code()))?;
    ensure!(report.test_samples == 5000, "bench predicted {} samples", report.test_samples);
    let predict = report.stages.iter().find(|s| s.stage == stage::PREDICT).unwrap();
    ensure!(predict.speedup >= 3.0, "predict speedup {:.2}x < 3x", predict.speedup);
    Ok(format!(
        "labels identical; Hamming predict n=5000 D=10240: packed {:.4}s, naive {:.4}s ({:.1}x)",
        predict.packed_seconds, predict.naive_seconds, predict.speedup
    ))
}

fn protocol_correctness() -> Outcome {
    let segs: Vec<u64> = (0..24u64).flat_map(|s| std::iter::repeat_n(s, 3 + (s as usize % 4))).collect();
    let n = segs.len();
    let d = Dataset::new(Array2::zeros((n, 1)), vec![0; n], Some(segs.clone())).unwrap();
    let plan = tscv_folds(&d).unwrap();
    ensure!(plan.len() == 23, "{} TSCV folds", plan.len());
    for (k, fold) in plan.folds.iter().enumerate() {
        let test_seg = k as u64 + 1;
        let expected_train: Vec<usize> = (0..n).filter(|&i| segs[i] < test_seg).collect();
        let expected_test: Vec<usize> = (0..n).filter(|&i| segs[i] == test_seg).collect();
        ensure!(fold.train == expected_train, "fold {k} train set");
        ensure!(fold.test == expected_test, "fold {k} test set");
    }

    let y: Vec<usize> = (0..510).map(|i| usize::from(i % 51 == 0)).collect();
    let d = Dataset::new(Array2::zeros((510, 1)), y, None).unwrap();
    let s = subsample_factor(&d, 1, 10, 7).unwrap();
    ensure!(s.len() == 110, "Fact10 kept {} samples", s.len());
    ensure!(s.y.iter().filter(|&&c| c == 1).count() == 10, "Fact10 minority count");
    Ok("TSCV over segments 0..23 gives 23 exact folds; Fact10 (10 + 500, x10) keeps 110".into())
}

fn end_to_end_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hypervec");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data.csv");
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        Ok(())
    };
    run(&[
        "synth", "--classes", "2", "--samples", "3000", "--features", "12", "--segments", "6", "--run-length", "25",
        "--class-weights", "4,1", "--seed", "3", "--out", data.to_str().unwrap(),
    ])?;
    let outs: Vec<_> = (0..2).map(|k| dir.path().join(format!("run{k}"))).collect();
    for out in &outs {
        run(&[
            "experiment", "--data", data.to_str().unwrap(), "--segment-column", "segment", "--split", "tscv",
            "--dim", "2048", "--batch-size", "16", "--seed", "11", "--out", out.to_str().unwrap(),
        ])?;
    }
    for file in ["predictions.csv", "metrics.json"] {
        let a = std::fs::read(outs[0].join(file)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outs[1].join(file)).map_err(|e| e.to_string())?;
        ensure!(!a.is_empty() && a == b, "{file} differs between runs");
    }
    Ok("predictions.csv and metrics.json byte-identical across two runs".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("kernel oracle equivalence", kernel_oracle_equivalence),
        ("memory contract", memory_contract),
        ("ID-Level encoding brute force", encode_brute_force),
        ("online update scalar oracle", online_scalar_oracle),
        ("accuracy ordering", accuracy_ordering),
        ("dimension sweep direction", dim_sweep),
        ("batch sweep direction", batch_sweep),
        ("backend speedup direction", backend_speedup),
        ("protocol correctness", protocol_correctness),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} ({secs:.1}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.1}s): {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
