// Accuracy against training-set size on a generated corpus, as CSV.
use stresskit::corpus::split_speakers;
use stresskit::curve::{learning_curve, CurveConfig};
use stresskit::dataset::features_for_clip;
use stresskit::synth::{generate, SynthConfig};

fn main() {
    let recs = generate(&SynthConfig {
        n_words: 400,
        n_speakers: 8,
        seed: 5,
        ..SynthConfig::default()
    });
    let mut rows = Vec::new();
    let mut words = Vec::new();
    for r in &recs {
        rows.extend(features_for_clip(&r.clip, &r.records).0);
        words.extend(r.records.iter().cloned());
    }
    let (train, _) = split_speakers(&words, 0.25, 5).unwrap();
    let ids: std::collections::BTreeSet<&str> = train.iter().map(|w| w.word_id.as_str()).collect();
    let (train_rows, test_rows): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| ids.contains(r.word_id.as_str()));

    let cfg = CurveConfig {
        sizes: vec![10, 25, 50, 100, 200],
        repeats: 5,
        seed: 5,
        ..CurveConfig::default()
    };
    let res = learning_curve(&train_rows, &[("heldout".into(), test_rows)], &cfg).unwrap();
    res.write_csv(std::io::stdout()).unwrap();
}
