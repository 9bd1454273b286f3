mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use stresskit::framecodec::PredictionRecord;
use stresskit::metrics::{
    agreement_report, bootstrap_ci, bootstrap_ci_levels, confusion_matrix, evaluate, krippendorff_alpha,
};

#[test]
fn alpha_hand_fixture() {
    let units = common::two_coder_units(&common::ALPHA_FIXTURE_A, &common::ALPHA_FIXTURE_B);
    let alpha = krippendorff_alpha(&units).unwrap();
    assert!((alpha - common::ALPHA_FIXTURE_VALUE).abs() < 1e-9, "{alpha}");
}

#[test]
fn alpha_perfect_and_chance() {
    let v: Vec<usize> = (0..50).map(|i| i % 4).collect();
    assert_eq!(krippendorff_alpha(&common::two_coder_units(&v, &v)).unwrap(), 1.0);
    let (a, b) = common::chance_coders(&mut common::rng(9), 10_000);
    let alpha = krippendorff_alpha(&common::two_coder_units(&a, &b)).unwrap();
    assert!(alpha.abs() <= 0.05, "{alpha}");
}

#[test]
fn agreement_report_counts_common_items() {
    let a: BTreeMap<String, usize> = (0..10).map(|i| (format!("w{i}"), i % 3)).collect();
    let mut b = a.clone();
    b.insert("w3".into(), 2);
    b.insert("extra".into(), 0);
    let r = agreement_report(&a, &b).unwrap();
    assert_eq!(r.n_items, 10);
    assert!((r.observed_agreement - 0.9).abs() < 1e-12);
}

#[test]
fn bootstrap_coverage() {
    let mut rng = common::rng(17);
    let mut covered = 0;
    for sim in 0..1000 {
        let data = common::bernoulli_sample(&mut rng, 500, 0.8);
        let (lo, hi) = bootstrap_ci(&data, 0.95, 10_000, sim).unwrap();
        covered += usize::from(lo <= 0.8 && 0.8 <= hi);
    }
    assert!(covered >= 930, "{covered}/1000");
}

#[test]
fn bootstrap_half_width_matches_normal_approximation() {
    let n = 1291;
    let k = (0.74f64 * n as f64).round() as usize;
    let data: Vec<bool> = (0..n).map(|i| i < k).collect();
    let (lo, hi) = bootstrap_ci(&data, 0.95, 10_000, 0).unwrap();
    let half = (hi - lo) / 2.0;
    let normal = common::normal_half_width(0.74, n);
    assert!((normal - 0.024).abs() < 0.001);
    assert!((half - normal).abs() <= 0.005, "{half} vs {normal}");
    // reported interval 74.0 [71.6, 76.3]
    assert!((half - (0.763 - 0.716) / 2.0).abs() <= 0.005);
}

#[test]
fn bootstrap_degenerate_and_errors() {
    assert_eq!(bootstrap_ci(&[true; 40], 0.95, 1000, 1).unwrap(), (1.0, 1.0));
    assert!(bootstrap_ci(&[true, false], 1.0, 100, 1).is_err());
    assert!(bootstrap_ci(&[true, false], 0.0, 100, 1).is_err());
    assert!(bootstrap_ci(&[], 0.95, 100, 1).is_err());
}

fn preds(pairs: &[(usize, usize)]) -> Vec<PredictionRecord> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(p, g))| PredictionRecord {
            word_id: format!("w{i:04}"),
            predicted_index: p,
            gold_index: Some(g),
            n_nuclei: 5,
            score: 0.0,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ci_contains_accuracy(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200), seed in any::<u64>()) {
        let r = evaluate(&preds(&pairs), "x", 0.95, 500, seed).unwrap();
        prop_assert!(r.ci_low <= r.accuracy && r.accuracy <= r.ci_high);
        prop_assert!(r.ci_low >= 0.0 && r.ci_high <= 1.0);
    }

    #[test]
    fn wider_levels_nest(bits in prop::collection::vec(any::<bool>(), 1..300), seed in any::<u64>()) {
        let cis = bootstrap_ci_levels(&bits, &[0.5, 0.8, 0.95, 0.99], 2000, seed).unwrap();
        for w in cis.windows(2) {
            prop_assert!(w[1].0 <= w[0].0 && w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn confusion_rows_sum_to_gold_counts(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..100)) {
        let m = confusion_matrix(&preds(&pairs)).unwrap();
        prop_assert_eq!(m.total(), pairs.len() as u64);
        let hist = m.gold_histogram();
        for (g, &count) in hist.iter().enumerate() {
            let want = pairs.iter().filter(|p| p.1 == g).count() as u64;
            prop_assert_eq!(count, want);
        }
        prop_assert_eq!(m.diagonal(), pairs.iter().filter(|p| p.0 == p.1).count() as u64);
    }

    #[test]
    fn alpha_is_label_permutation_invariant(a in prop::collection::vec(0usize..3, 4..60), b_seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = common::rng(b_seed);
        let b: Vec<usize> = a.iter().map(|&x| if rng.random_bool(0.3) { rng.random_range(0..3) } else { x }).collect();
        let perm = |v: &[usize]| v.iter().map(|&x| [7, 2, 5][x]).collect::<Vec<_>>();
        let x = krippendorff_alpha(&common::two_coder_units(&a, &b));
        let y = krippendorff_alpha(&common::two_coder_units(&perm(&a), &perm(&b)));
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x.is_ok(), y.is_ok()),
        }
    }
}
