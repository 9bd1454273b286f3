// Train the nucleus SVM on one group of speakers and predict the stressed
// syllable for words of the others.
use stresskit::corpus::split_speakers;
use stresskit::dataset::{features_for_clip, predict_rows, to_instances};
use stresskit::metrics::word_accuracy;
use stresskit::svm::{train_svm_report, SvmParams};
use stresskit::synth::{generate, SynthConfig};

fn main() {
    let recs = generate(&SynthConfig {
        n_words: 300,
        n_speakers: 6,
        seed: 11,
        ..SynthConfig::default()
    });
    let mut rows = Vec::new();
    let mut words = Vec::new();
    for r in &recs {
        rows.extend(features_for_clip(&r.clip, &r.records).0);
        words.extend(r.records.iter().cloned());
    }
    let (train, _) = split_speakers(&words, 0.2, 11).unwrap();
    let ids: std::collections::BTreeSet<&str> = train.iter().map(|w| w.word_id.as_str()).collect();
    let (train_rows, test_rows): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| ids.contains(r.word_id.as_str()));

    let report = train_svm_report(&to_instances(&train_rows), &SvmParams::default()).unwrap();
    let m = &report.model;
    println!(
        "kernel {} C {} gamma {:.3}: {} support vectors after {} iterations",
        m.kernel,
        m.c,
        m.gamma,
        m.support_vectors.len(),
        report.iterations
    );
    let preds = predict_rows(m, &test_rows).unwrap();
    for p in preds.iter().take(5) {
        println!("{} predicted {} gold {:?} score {:.3}", p.word_id, p.predicted_index, p.gold_index, p.score);
    }
    println!("word accuracy on {} held-out words: {:.3}", preds.len(), word_accuracy(&preds).unwrap());
}
