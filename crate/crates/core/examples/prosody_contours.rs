// Pitch, intensity and sonority contours of a synthetic word, and the ten
// features of each nucleus.
use stresskit::prosody::{word_features, ProsodyTracks, FEATURE_NAMES};
use stresskit::synth::{generate, SynthConfig};

fn main() {
    let rec = generate(&SynthConfig {
        n_words: 1,
        n_speakers: 1,
        words_per_recording: 1,
        vocabulary: 1,
        seed: 3,
        dataset: "demo".into(),
    })
    .remove(0);
    let word = &rec.records[0];
    println!("{} {:?} [{:.3}, {:.3}] stress on nucleus {:?}", word.word_id, word.text, word.t0, word.t1, word.stress_index);

    let tracks = ProsodyTracks::compute(&rec.clip);
    println!("{:>7} {:>8} {:>7} {:>6}", "t", "f0", "dB", "son");
    for i in (0..tracks.pitch.len()).step_by(5) {
        let p = tracks.pitch.values[i];
        println!(
            "{:>7.3} {:>8} {:>7.1} {:>6.3}",
            tracks.pitch.time(i),
            if p.voiced { format!("{:.1}", p.value) } else { "-".into() },
            tracks.intensity.values[i].value,
            tracks.sonority.values[i].value
        );
    }

    for (k, m) in word_features(&rec.clip, word).unwrap().iter().enumerate() {
        println!("nucleus {k}");
        for (name, v) in FEATURE_NAMES.iter().zip(m.features.to_array()) {
            println!("  {name:<16} {v:.4}");
        }
    }
}
