// Speaker-disjoint train/test split of a generated corpus.
use std::collections::BTreeSet;

use stresskit::corpus::split::gender_deviation;
use stresskit::corpus::split_speakers;
use stresskit::synth::{generate, SynthConfig};

fn main() {
    let recs = generate(&SynthConfig {
        n_words: 400,
        n_speakers: 8,
        seed: 1,
        ..SynthConfig::default()
    });
    let words: Vec<_> = recs.into_iter().flat_map(|r| r.records).collect();
    let (train, test) = split_speakers(&words, 0.2, 1).unwrap();
    let speakers = |v: &[stresskit::corpus::WordRecord]| -> BTreeSet<String> {
        v.iter().map(|r| format!("{}({})", r.speaker_id, r.gender)).collect()
    };
    println!("train {} words from {:?}", train.len(), speakers(&train));
    println!("test  {} words from {:?}", test.len(), speakers(&test));
    println!("test share {:.3}, test gender deviation {:.3}", test.len() as f64 / words.len() as f64, gender_deviation(&test));
}
