//! Synthetic stress corpus: vowel-like harmonic syllables with a
//! prominent stressed nucleus, written as WAV + TextGrid pairs.
//!
//! Each syllable is a short noise onset followed by a harmonic nucleus. The
//! stressed nucleus is twice as loud (+6 dB), 1.5 times as long and has a
//! 30% higher F0 than the unstressed ones; every syllable also gets random
//! jitter in all three so that the task is not trivially separable.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::{self, AudioClip, CANONICAL_RATE};
use crate::corpus::{build_manifest, records_to_textgrid, write_textgrid, Gender, ManifestOptions, NucleusSpan, WordRecord};

pub const STRESS_GAIN: f64 = 2.0;
pub const STRESS_LENGTHENING: f64 = 1.5;
pub const STRESS_F0_RAISE: f64 = 1.3;

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ta", "ne", "ru", "vo", "si", "lja", "nje", "do", "pu", "ze", "bi", "ko", "ra",
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_words: usize,
    pub n_speakers: usize,
    pub words_per_recording: usize,
    pub vocabulary: usize,
    pub seed: u64,
    pub dataset: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_words: 500,
            n_speakers: 10,
            words_per_recording: 25,
            vocabulary: 80,
            seed: 0,
            dataset: "synth".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Speaker {
    id: String,
    gender: Gender,
    f0: f64,
    rate: f64,
}

#[derive(Debug, Clone)]
struct WordType {
    text: String,
    n_syll: usize,
    stress: usize,
}

/// One generated recording with its annotation.
#[derive(Debug, Clone)]
pub struct SynthRecording {
    pub stem: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub clip: AudioClip,
    pub records: Vec<WordRecord>,
}

fn vocabulary(n: usize, rng: &mut ChaCha8Rng) -> Vec<WordType> {
    let mut out: Vec<WordType> = Vec::with_capacity(n);
    while out.len() < n {
        let n_syll = rng.random_range(2..=4);
        let text: String = (0..n_syll).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        if out.iter().any(|w| w.text == text) {
            continue;
        }
        // initial stress is the most common pattern
        let stress = if rng.random_bool(0.6) { 0 } else { rng.random_range(0..n_syll) };
        out.push(WordType { text, n_syll, stress });
    }
    out
}

fn speakers(n: usize, rng: &mut ChaCha8Rng) -> Vec<Speaker> {
    (0..n)
        .map(|k| {
            let gender = if k % 2 == 0 { Gender::F } else { Gender::M };
            let base = if gender == Gender::F { 200.0 } else { 120.0 };
            Speaker {
                id: format!("spk{k:02}"),
                gender,
                f0: base * rng.random_range(0.9..1.1),
                rate: rng.random_range(0.85..1.15),
            }
        })
        .collect()
}

/// Formant-shaped harmonic weights for a vowel with formants `f1`, `f2`.
fn harmonic_weight(freq: f64, f1: f64, f2: f64) -> f64 {
    let bump = |f: f64, c: f64, bw: f64| (-((f - c) / bw).powi(2)).exp();
    0.15 + bump(freq, f1, 150.0) + 0.7 * bump(freq, f2, 250.0)
}

fn fade(n: usize, i: usize, ramp: usize) -> f64 {
    let r = ramp.min(n / 2).max(1);
    if i < r {
        0.5 - 0.5 * (PI * i as f64 / r as f64).cos()
    } else if i + r > n {
        0.5 - 0.5 * (PI * (n - i) as f64 / r as f64).cos()
    } else {
        1.0
    }
}

/// Appends a harmonic nucleus with an F0 falling by 10% over its length.
fn push_vowel(out: &mut Vec<f64>, secs: f64, f0: f64, amp: f64, formants: (f64, f64)) {
    let rate = CANONICAL_RATE as f64;
    let n = (secs * rate).round() as usize;
    let nyquist = rate / 2.0;
    let n_harm = (nyquist * 0.9 / (f0 * 1.05)).floor() as usize;
    let weights: Vec<f64> = (1..=n_harm)
        .map(|k| harmonic_weight(k as f64 * f0, formants.0, formants.1) / k as f64)
        .collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt() / std::f64::consts::SQRT_2;
    let mut phase = 0.0;
    for i in 0..n {
        let f = f0 * (1.05 - 0.1 * i as f64 / n as f64);
        phase += 2.0 * PI * f / rate;
        let s: f64 = weights.iter().enumerate().map(|(k, w)| w * ((k + 1) as f64 * phase).sin()).sum();
        out.push(amp * fade(n, i, 80) * s / norm);
    }
}

fn push_noise(out: &mut Vec<f64>, secs: f64, amp: f64, rng: &mut ChaCha8Rng) {
    let n = (secs * CANONICAL_RATE as f64).round() as usize;
    for i in 0..n {
        out.push(amp * fade(n, i, 40) * rng.random_range(-1.0..1.0));
    }
}

fn push_silence(out: &mut Vec<f64>, secs: f64, rng: &mut ChaCha8Rng) {
    push_noise(out, secs, 2e-4, rng);
}

/// Generates the corpus in memory.
pub fn generate(cfg: &SynthConfig) -> Vec<SynthRecording> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = vocabulary(cfg.vocabulary.max(1), &mut rng);
    let spk = speakers(cfg.n_speakers.max(1), &mut rng);
    let jitter = Normal::new(0.0f64, 1.0).expect("valid");
    let formants = [(700.0, 1200.0), (500.0, 1800.0), (350.0, 2200.0), (450.0, 900.0), (600.0, 1500.0)];
    let rate = CANONICAL_RATE as f64;

    let mut out = Vec::new();
    let per = cfg.words_per_recording.max(1);
    let mut made = 0usize;
    let mut rec_no = 0usize;
    while made < cfg.n_words {
        let speaker = &spk[rec_no % spk.len()];
        let stem = format!("{}_{:03}", speaker.id, rec_no / spk.len());
        let count = per.min(cfg.n_words - made);
        let mut samples = Vec::new();
        push_silence(&mut samples, 0.2, &mut rng);
        let mut records = Vec::with_capacity(count);
        for _ in 0..count {
            let w = vocab.choose(&mut rng).expect("non-empty");
            let word_gain = 0.12 * 10f64.powf(rng.random_range(-6.0..6.0) / 20.0);
            let t0 = samples.len() as f64 / rate;
            let mut nuclei = Vec::with_capacity(w.n_syll);
            for s in 0..w.n_syll {
                let stressed = s == w.stress;
                let onset = 0.045 * speaker.rate * (1.0 + 0.1 * jitter.sample(&mut rng)).max(0.5);
                push_noise(&mut samples, onset, 0.1 * word_gain, &mut rng);
                let mut dur = 0.09 * speaker.rate * (1.0 + 0.12 * jitter.sample(&mut rng)).max(0.5);
                let mut amp = word_gain * 10f64.powf(1.5 * jitter.sample(&mut rng) / 20.0);
                let mut f0 = speaker.f0 * (1.0 - 0.04 * s as f64) * (1.0 + 0.04 * jitter.sample(&mut rng));
                if stressed {
                    dur *= STRESS_LENGTHENING;
                    amp *= STRESS_GAIN;
                    f0 *= STRESS_F0_RAISE;
                }
                let n0 = samples.len();
                push_vowel(&mut samples, dur, f0, amp, *formants.choose(&mut rng).expect("non-empty"));
                nuclei.push(NucleusSpan {
                    t0: n0 as f64 / rate,
                    t1: samples.len() as f64 / rate,
                    syllable_index: s,
                });
            }
            let t1 = samples.len() as f64 / rate;
            records.push(WordRecord {
                word_id: String::new(),
                text: w.text.clone(),
                audio_path: String::new(),
                t0,
                t1,
                nuclei,
                stress_index: Some(w.stress),
                speaker_id: speaker.id.clone(),
                gender: speaker.gender,
                dataset: cfg.dataset.clone(),
            });
            let gap = rng.random_range(0.15..0.3);
            push_silence(&mut samples, gap, &mut rng);
        }
        let clip = AudioClip::new(samples.iter().map(|v| v.clamp(-1.0, 1.0)).collect(), CANONICAL_RATE);
        let audio_path = format!("{stem}.wav");
        let opts = manifest_options(speaker, &cfg.dataset);
        let doc = records_to_textgrid(&records, clip.duration(), &opts);
        let records = build_manifest(&doc, &audio_path, &opts).expect("tiers present").records;
        made += count;
        rec_no += 1;
        out.push(SynthRecording {
            stem,
            speaker_id: speaker.id.clone(),
            gender: speaker.gender,
            clip,
            records,
        });
    }
    out
}

fn manifest_options(speaker: &Speaker, dataset: &str) -> ManifestOptions {
    ManifestOptions {
        speaker_id: speaker.id.clone(),
        gender: speaker.gender,
        dataset: dataset.to_string(),
        ..ManifestOptions::default()
    }
}

/// Name of the corpus listing written next to the recordings.
pub const LISTING: &str = "corpus.tsv";

/// Writes each recording as `<stem>.wav` and `<stem>.TextGrid` under `dir`,
/// plus a tab-separated listing (`textgrid`, `wav`, `speaker`, `gender`,
/// `dataset`) that the ingest command accepts. Returns the listing path.
pub fn write_corpus(dir: &Path, recordings: &[SynthRecording], dataset: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let listing = dir.join(LISTING);
    let mut f = fs::File::create(&listing)?;
    writeln!(f, "textgrid\twav\tspeaker\tgender\tdataset")?;
    for r in recordings {
        let wav = format!("{}.wav", r.stem);
        let tg = format!("{}.TextGrid", r.stem);
        audio::write_wav(dir.join(&wav), &r.clip).map_err(std::io::Error::other)?;
        let opts = ManifestOptions::default();
        let doc = records_to_textgrid(&r.records, r.clip.duration(), &opts);
        write_textgrid(dir.join(&tg), &doc).map_err(std::io::Error::other)?;
        writeln!(f, "{tg}\t{wav}\t{}\t{}\t{dataset}", r.speaker_id, r.gender)?;
    }
    Ok(listing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            n_words: 30,
            n_speakers: 4,
            words_per_recording: 8,
            vocabulary: 10,
            seed: 5,
            dataset: "t".into(),
        }
    }

    #[test]
    fn word_count_and_structure() {
        let recs = generate(&small());
        let words: Vec<&WordRecord> = recs.iter().flat_map(|r| &r.records).collect();
        assert_eq!(words.len(), 30);
        for w in &words {
            assert!((2..=4).contains(&w.nuclei.len()));
            assert!(w.validate().is_ok());
            assert!(w.stress_index.is_some());
        }
        assert!(recs.iter().all(|r| r.clip.samples.iter().all(|v| v.abs() <= 1.0)));
    }

    #[test]
    fn deterministic() {
        let a = generate(&small());
        let b = generate(&small());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.clip, y.clip);
            assert_eq!(x.records, y.records);
        }
    }

    #[test]
    fn stressed_nucleus_is_louder_on_average() {
        let recs = generate(&small());
        let (mut s, mut u) = (Vec::new(), Vec::new());
        for r in &recs {
            for w in &r.records {
                for (k, n) in w.nuclei.iter().enumerate() {
                    let rms = audio::slice(&r.clip, n.t0, n.t1).unwrap().rms();
                    if Some(k) == w.stress_index {
                        s.push(rms);
                    } else {
                        u.push(rms);
                    }
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&s) > 1.5 * mean(&u));
    }
}
