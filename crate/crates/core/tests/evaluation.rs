use std::collections::HashSet;
use std::fs;

use meshsteg_core::eval::experiment::SvmSelection;
use meshsteg_core::eval::metrics::median;
use meshsteg_core::eval::{
    detection_error, make_splits, pearson_relevance, roc_auc, run_experiment, write_report,
    Confusion, ExperimentConfig, PairedCorpus, SplitPlan,
};
use meshsteg_core::{ClassifierKind, FeatureSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::pair_count_auc;

#[test]
fn auc_equals_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let n = rng.random_range(2..80);
        // Coarse rounding produces plenty of ties.
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.random::<f64>() * 8.0).round() / 8.0)
            .collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let (pts, auc) = roc_auc(&scores, &labels).unwrap();
        assert!((auc - pair_count_auc(&scores, &labels)).abs() < 1e-12);
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert!(pts.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
    }
}

#[test]
fn perfect_auc_admits_a_zero_error_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let labels: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let scores: Vec<f64> = labels
            .iter()
            .map(|&l| rng.random::<f64>() + if l { 1.5 } else { 0.0 })
            .collect();
        let (_, auc) = roc_auc(&scores, &labels).unwrap();
        assert_eq!(auc, 1.0);
        let exists = scores.iter().any(|&t| {
            let pred: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
            detection_error(&Confusion::from_predictions(&pred, &labels)).unwrap() == 0.0
        });
        assert!(exists);
    }
}

fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (n - 1.0);
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (cov / (sx * sy)).abs()
}

#[test]
fn relevance_matches_textbook_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 60;
    let labels: Vec<bool> = (0..n).map(|i| i % 3 != 0).collect();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..76)
                .map(|j| rng.random::<f64>() + if j % 5 == 0 { y[i] } else { 0.0 })
                .collect()
        })
        .collect();
    let r = pearson_relevance(&x, &labels, FeatureSet::Lfs76).unwrap();
    for j in 0..76 {
        let col: Vec<f64> = x.iter().map(|row| row[j]).collect();
        assert!((r.per_feature[j] - textbook_pearson(&col, &y)).abs() < 1e-12);
    }
    assert_eq!(r.categories.len(), 10);
    let groups: [&[usize]; 10] = [
        &[1, 2, 3],
        &[7],
        &[4, 5, 6],
        &[8],
        &[10],
        &[9],
        &[11],
        &[12, 13],
        &[14, 15, 16],
        &[17, 18, 19],
    ];
    for (c, phis) in groups.iter().enumerate() {
        let vals: Vec<f64> = phis
            .iter()
            .flat_map(|p| (0..4).map(move |m| 4 * (p - 1) + m))
            .map(|j| r.per_feature[j])
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert_eq!(r.categories[c].0, c + 1);
        assert!((r.categories[c].1 - mean).abs() < 1e-15);
    }
}

#[test]
fn label_copy_has_unit_relevance() {
    let labels: Vec<bool> = (0..20).map(|i| i % 4 < 2).collect();
    let x: Vec<Vec<f64>> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut row: Vec<f64> = (0..76).map(|j| ((i * 7 + j * 3) % 11) as f64).collect();
            row[10] = f64::from(u8::from(l));
            row[11] = -f64::from(u8::from(l));
            row[12] = 4.0;
            row
        })
        .collect();
    let r = pearson_relevance(&x, &labels, FeatureSet::Lfs76).unwrap();
    assert!((r.per_feature[10] - 1.0).abs() < 1e-15);
    assert!((r.per_feature[11] - 1.0).abs() < 1e-15);
    assert_eq!(r.per_feature[12], 0.0);
}

#[test]
fn every_partition_of_four_pairs_appears() {
    let mut seen = HashSet::new();
    for seed in 0..200 {
        let plan = SplitPlan {
            trials: 1,
            train: 3,
            test: 1,
            seed,
        };
        seen.insert(make_splits(4, &plan).unwrap()[0].test.clone());
    }
    assert_eq!(seen.len(), 4);
}

#[test]
fn partition_frequencies_are_uniform() {
    let plan = SplitPlan {
        trials: 4000,
        train: 3,
        test: 1,
        seed: 99,
    };
    let mut counts = [0usize; 4];
    for s in make_splits(4, &plan).unwrap() {
        counts[s.test[0]] += 1;
    }
    // Each held-out pair has probability 1/4; 5 sigma is about 137.
    for c in counts {
        assert!((c as i64 - 1000).abs() < 140, "{counts:?}");
    }
}

fn toy_corpus(pairs: usize, seed: u64) -> PairedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covers = Vec::new();
    let mut stegos = Vec::new();
    for _ in 0..pairs {
        let base: Vec<f64> = (0..76).map(|_| rng.random::<f64>()).collect();
        let stego: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(j, v)| v + if j % 9 == 0 { 0.3 } else { 0.0 } + 0.2 * rng.random::<f64>())
            .collect();
        covers.push(base);
        stegos.push(stego);
    }
    PairedCorpus::new(FeatureSet::Lfs76, covers, stegos).unwrap()
}

fn config() -> ExperimentConfig {
    ExperimentConfig {
        sets: vec![FeatureSet::Yang40, FeatureSet::Lfs76],
        classifiers: ClassifierKind::ALL.to_vec(),
        plan: SplitPlan {
            trials: 5,
            train: 40,
            test: 20,
            seed: 12,
        },
        svm: SvmSelection::Preset(None),
    }
}

#[test]
fn summaries_recompute_from_per_trial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&toy_corpus(60, 4), &config()).unwrap();
    write_report(&report, dir.path()).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("report.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 3 * 5);
    let mut summary = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    for rec in summary.records().map(Result::unwrap) {
        let cell: Vec<&csv::StringRecord> = rows
            .iter()
            .filter(|r| r[0] == rec[0] && r[1] == rec[1])
            .collect();
        assert_eq!(cell.len(), 5);
        let col = |k: usize| -> Vec<f64> { cell.iter().map(|r| r[k].parse().unwrap()).collect() };
        let (errors, counts, aucs) = (col(8), col(7), col(9));
        assert_eq!(rec[3].parse::<f64>().unwrap(), median(&errors));
        assert_eq!(rec[4].parse::<f64>().unwrap(), median(&counts));
        assert_eq!(rec[5].parse::<f64>().unwrap(), median(&aucs));
        let m = aucs.iter().sum::<f64>() / 5.0;
        let sd = (aucs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((rec[6].parse::<f64>().unwrap() - sd).abs() < 1e-12);
        for r in &cell {
            let c: Vec<usize> = (3..7).map(|k| r[k].parse().unwrap()).collect();
            assert_eq!(c.iter().sum::<usize>(), 40);
            let err = (c[1] + c[3]) as f64 / 40.0;
            assert_eq!(r[8].parse::<f64>().unwrap(), err);
        }
    }
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let corpus = toy_corpus(60, 5);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files_a = write_report(&run_experiment(&corpus, &config()).unwrap(), a.path()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let report_b = pool.install(|| run_experiment(&corpus, &config())).unwrap();
    let files_b = write_report(&report_b, b.path()).unwrap();
    assert_eq!(files_a.len(), files_b.len());
    for (fa, fb) in files_a.iter().zip(&files_b) {
        assert_eq!(fa.file_name(), fb.file_name());
        assert_eq!(
            fs::read(fa).unwrap(),
            fs::read(fb).unwrap(),
            "{}",
            fa.display()
        );
    }
    assert!(files_a.iter().any(|p| p.ends_with("roc_lfs76_fld.csv")));
    assert!(files_a.iter().any(|p| p.ends_with("relevance.csv")));
}

proptest! {
    #[test]
    fn auc_is_invariant_under_monotone_rescaling(
        raw in prop::collection::vec((0u8..20, any::<bool>()), 2..60),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let mut labels: Vec<bool> = raw.iter().map(|r| r.1).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = raw.iter().map(|r| f64::from(r.0)).collect();
        let moved: Vec<f64> = scores.iter().map(|s| s * scale + shift).collect();
        let (_, a) = roc_auc(&scores, &labels).unwrap();
        let (_, b) = roc_auc(&moved, &labels).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        let (_, c) = roc_auc(&flipped, &labels).unwrap();
        prop_assert!((a + c - 1.0).abs() < 1e-12);
    }
}
