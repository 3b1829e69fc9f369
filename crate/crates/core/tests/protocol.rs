use hypervec::data::{
    leave_one_segment_out, load_csv, save_csv, subsample_factor, synthesize, tscv_folds, CsvSchema, SyntheticSpec,
};
use hypervec::eval::{episode_metrics, sample_metrics, smooth_labels};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn csv_roundtrip_10k_rows() {
    let d = synthesize(&SyntheticSpec {
        samples: 10_000,
        features: 8,
        segments: 10,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    save_csv(&d, &path).unwrap();
    let back = load_csv(&path, &CsvSchema::default().with_segments("segment")).unwrap();
    assert_eq!(back.y, d.y);
    assert_eq!(back.segments, d.segments);
    for (a, b) in back.x.iter().zip(d.x.iter()) {
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn loso_fold_sizes_match_segment_counts() {
    let d = synthesize(&SyntheticSpec {
        samples: 1234,
        segments: 40,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    let plan = leave_one_segment_out(&d).unwrap();
    assert_eq!(plan.len(), 40);
    let segs = d.segments.as_ref().unwrap();
    for fold in &plan.folds {
        let id = fold.test_segment.unwrap();
        let count = segs.iter().filter(|&&s| s == id).count();
        assert_eq!(fold.test.len(), count);
        assert_eq!(fold.train.len() + fold.test.len(), d.len());
        assert!(fold.test.iter().all(|i| !fold.train.contains(i)));
    }
}

#[test]
fn tscv_24_segments() {
    let d = synthesize(&SyntheticSpec {
        samples: 2400,
        segments: 24,
        seed: 2,
        ..Default::default()
    })
    .unwrap();
    let plan = tscv_folds(&d).unwrap();
    assert_eq!(plan.len(), 23);
    let segs = d.segments.as_ref().unwrap();
    for (k, fold) in plan.folds.iter().enumerate() {
        let test_seg = fold.test_segment.unwrap();
        assert_eq!(test_seg, k as u64 + 1);
        assert!(fold.train.iter().all(|&i| segs[i] < test_seg));
        assert!(fold.test.iter().all(|&i| segs[i] == test_seg));
        if k > 0 {
            let prev = &plan.folds[k - 1].train;
            assert!(fold.train.len() > prev.len() && fold.train.starts_with(prev));
        }
    }
}

#[test]
fn subsample_ratio_exact() {
    let d = synthesize(&SyntheticSpec {
        classes: 2,
        samples: 3000,
        class_weights: vec![20.0, 1.0],
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let minority = d.y.iter().filter(|&&y| y == 1).count();
    let s = subsample_factor(&d, 1, 10, 9).unwrap();
    assert_eq!(s.y.iter().filter(|&&y| y == 1).count(), minority);
    assert_eq!(s.y.iter().filter(|&&y| y == 0).count(), 10 * minority);
}

fn scalar_smooth(labels: &[u8], window: usize) -> Vec<u8> {
    let h = window / 2;
    (0..labels.len())
        .map(|i| {
            let mut ones = 0;
            let mut zeros = 0;
            for j in i.saturating_sub(h)..=(i + h).min(labels.len() - 1) {
                if labels[j] == 1 {
                    ones += 1;
                } else {
                    zeros += 1;
                }
            }
            u8::from(ones >= zeros)
        })
        .collect()
}

proptest! {
    #[test]
    fn smoothing_matches_scan(labels in proptest::collection::vec(0u8..=1, 0..200), half in 0usize..8) {
        let w = 2 * half + 1;
        let out = smooth_labels(&labels, w).unwrap();
        prop_assert_eq!(out.len(), labels.len());
        prop_assert_eq!(out, scalar_smooth(&labels, w));
    }

    #[test]
    fn episode_counts_are_bounded(pred in proptest::collection::vec(0usize..=1, 1..300), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth: Vec<usize> = (0..pred.len()).map(|_| usize::from(rng.random_bool(0.3))).collect();
        let e = episode_metrics(&pred, &truth, 1).unwrap();
        prop_assert!(e.detected <= e.total);
    }
}

#[test]
fn metrics_match_scalar_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pred: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
    let truth: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..3)).collect();
    let r = sample_metrics(&pred, &truth, 2).unwrap();
    let (mut tp, mut fp, mut fneg, mut correct) = (0u64, 0u64, 0u64, 0usize);
    for i in 0..pred.len() {
        if pred[i] == truth[i] {
            correct += 1;
        }
        if pred[i] == 2 && truth[i] == 2 {
            tp += 1;
        } else if pred[i] == 2 {
            fp += 1;
        } else if truth[i] == 2 {
            fneg += 1;
        }
    }
    assert_eq!((r.confusion.tp, r.confusion.fp, r.confusion.fn_), (tp, fp, fneg));
    assert_eq!(r.confusion.total(), 10_000);
    assert_eq!(r.accuracy, correct as f64 / 10_000.0);
    let tpr = tp as f64 / (tp + fneg) as f64;
    let ppv = tp as f64 / (tp + fp) as f64;
    assert!((r.f1.unwrap() - 2.0 * tpr * ppv / (tpr + ppv)).abs() < 1e-12);
}

#[test]
fn episode_scan_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.random_range(1..100);
        let pred: Vec<usize> = (0..n).map(|_| usize::from(rng.random_bool(0.2))).collect();
        let truth: Vec<usize> = (0..n).map(|_| usize::from(rng.random_bool(0.4))).collect();
        let e = episode_metrics(&pred, &truth, 1).unwrap();
        // scan: label each sample with its run id, then compare run sets
        let (mut total, mut detected, mut fp_eps) = (0, 0, 0);
        let mut i = 0;
        while i < n {
            if truth[i] == 1 {
                let start = i;
                while i < n && truth[i] == 1 {
                    i += 1;
                }
                total += 1;
                if (start..i).any(|j| pred[j] == 1) {
                    detected += 1;
                }
            } else {
                i += 1;
            }
        }
        i = 0;
        while i < n {
            if pred[i] == 1 {
                let start = i;
                while i < n && pred[i] == 1 {
                    i += 1;
                }
                if (start..i).all(|j| truth[j] == 0) {
                    fp_eps += 1;
                }
            } else {
                i += 1;
            }
        }
        assert_eq!((e.detected, e.total, e.false_positive_episodes), (detected, total, fp_eps));
    }
}
