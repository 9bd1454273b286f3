// 20 ms frame labels for a word and decoding of noisy frame logits.
use rand::{Rng, SeedableRng};
use stresskit::corpus::{Gender, NucleusSpan, WordRecord};
use stresskit::framecodec::{decode_logits, encode_labels, FrameLogitSeq};

fn main() {
    let span = |t0, t1, i| NucleusSpan { t0, t1, syllable_index: i };
    let word = WordRecord {
        word_id: "demo".into(),
        text: "zastupnik".into(),
        audio_path: "demo.wav".into(),
        t0: 0.0,
        t1: 0.42,
        nuclei: vec![span(0.04, 0.1, 0), span(0.17, 0.26, 1), span(0.32, 0.38, 2)],
        stress_index: Some(1),
        speaker_id: "s".into(),
        gender: Gender::Unknown,
        dataset: "demo".into(),
    };
    let enc = encode_labels(&word).unwrap();
    let labels: String = enc.seq.labels.iter().map(|l| l.to_string()).collect();
    println!("labels {labels}");

    // A frame classifier that is right most of the time.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let logits = enc
        .seq
        .labels
        .iter()
        .map(|&l| {
            let pos = if l == 1 { 1.0 } else { -1.0 } + rng.random_range(-1.2..1.2);
            [0.0, pos]
        })
        .collect::<Vec<_>>();
    let predicted: String = logits.iter().map(|l| if l[1] > l[0] { '1' } else { '0' }).collect();
    println!("frames {predicted}");
    let seq = FrameLogitSeq {
        word_id: word.word_id.clone(),
        hop_ms: 20,
        logits,
    };
    let p = decode_logits(&seq, &word).unwrap();
    println!("predicted nucleus {} (gold {:?}), score {:.3}", p.predicted_index, p.gold_index, p.score);
}
