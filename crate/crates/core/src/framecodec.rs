//! 20 ms frame labels for stress, and the reverse mapping from per-frame
//! logits to a stressed-nucleus index.
//!
//! Frame `i` of a word covers `[t0 + i*hop, t0 + (i+1)*hop)` and belongs to
//! a nucleus when its midpoint lies in `[nucleus.t0, nucleus.t1)`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{NucleusSpan, WordRecord};
use crate::jsonl::{self, JsonlError};

pub const HOP_MS: u32 = 20;

/// Tolerance, in frames, when rounding a duration up to a frame count.
const FRAME_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("word {0} has no stress annotation")]
    MissingStress(String),
    #[error("word {0} has non-positive duration")]
    EmptyWord(String),
    #[error("word {0} needs at least two nuclei")]
    TooFewNuclei(String),
    #[error("word {0}: no logits")]
    NoLogits(String),
    #[error("word {word_id}: hop must be positive")]
    BadHop { word_id: String },
    #[error("word {word_id}: {got} logit frames, expected {expected} (+-1)")]
    LengthMismatch {
        word_id: String,
        got: usize,
        expected: usize,
    },
    #[error("word {0}: non-finite logit")]
    NonFinite(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLabelSeq {
    pub word_id: String,
    pub hop_ms: u32,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLogitSeq {
    pub word_id: String,
    pub hop_ms: u32,
    /// `[neg, pos]` per frame.
    pub logits: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub word_id: String,
    pub predicted_index: usize,
    pub gold_index: Option<usize>,
    pub n_nuclei: usize,
    pub score: f64,
}

/// Encoder output; `empty_nucleus` is set when the stressed nucleus holds
/// no frame midpoint, so every label is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub seq: FrameLabelSeq,
    pub empty_nucleus: bool,
}

fn hop_s(hop_ms: u32) -> f64 {
    hop_ms as f64 / 1000.0
}

/// `ceil(duration / hop)`, at least 1.
pub fn frame_count(duration: f64, hop_ms: u32) -> usize {
    ((duration / hop_s(hop_ms) - FRAME_EPS).ceil() as usize).max(1)
}

/// Absolute time of the midpoint of frame `i`.
pub fn frame_midpoint(word_t0: f64, i: usize, hop_ms: u32) -> f64 {
    word_t0 + (i as f64 + 0.5) * hop_s(hop_ms)
}

fn frames_in(word_t0: f64, n_frames: usize, hop_ms: u32, nucleus: &NucleusSpan) -> impl Iterator<Item = usize> + '_ {
    let (a, b) = (nucleus.t0, nucleus.t1);
    (0..n_frames).filter(move |&i| {
        let m = frame_midpoint(word_t0, i, hop_ms);
        m >= a && m < b
    })
}

pub fn encode_labels(word: &WordRecord) -> Result<Encoded, CodecError> {
    let nucleus = word
        .stressed_nucleus()
        .ok_or_else(|| CodecError::MissingStress(word.word_id.clone()))?;
    let duration = word.duration();
    if !(duration > 0.0) {
        return Err(CodecError::EmptyWord(word.word_id.clone()));
    }
    let n = frame_count(duration, HOP_MS);
    let mut labels = vec![0u8; n];
    for i in frames_in(word.t0, n, HOP_MS, nucleus) {
        labels[i] = 1;
    }
    let empty_nucleus = !labels.contains(&1);
    Ok(Encoded {
        seq: FrameLabelSeq {
            word_id: word.word_id.clone(),
            hop_ms: HOP_MS,
            labels,
        },
        empty_nucleus,
    })
}

/// Maximal runs of 1s as half-open frame ranges.
fn runs(labels: &[u8]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l, start) {
            (1, None) => start = Some(i),
            (0, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, labels.len()));
    }
    out
}

/// Nucleus closest to frames `[a, b)`: most frame midpoints inside, then
/// largest time overlap, then smallest midpoint distance, then earliest.
fn closest_nucleus(word: &WordRecord, hop_ms: u32, a: usize, b: usize) -> usize {
    let h = hop_s(hop_ms);
    let (s0, s1) = (word.t0 + a as f64 * h, word.t0 + b as f64 * h);
    let span_mid = 0.5 * (s0 + s1);
    let key = |n: &NucleusSpan| {
        let count = (a..b)
            .filter(|&i| {
                let m = frame_midpoint(word.t0, i, hop_ms);
                m >= n.t0 && m < n.t1
            })
            .count();
        let overlap = (s1.min(n.t1) - s0.max(n.t0)).max(0.0);
        (count, overlap, (n.midpoint() - span_mid).abs())
    };
    let mut best = 0;
    let mut best_key = key(&word.nuclei[0]);
    for (k, n) in word.nuclei.iter().enumerate().skip(1) {
        let kk = key(n);
        let better = kk.0 > best_key.0
            || (kk.0 == best_key.0 && kk.1 > best_key.1)
            || (kk.0 == best_key.0 && kk.1 == best_key.1 && kk.2 < best_key.2);
        if better {
            best = k;
            best_key = kk;
        }
    }
    best
}

pub fn decode_logits(logits: &FrameLogitSeq, word: &WordRecord) -> Result<PredictionRecord, CodecError> {
    let id = || word.word_id.clone();
    if word.nuclei.len() < 2 {
        return Err(CodecError::TooFewNuclei(id()));
    }
    if logits.logits.is_empty() {
        return Err(CodecError::NoLogits(id()));
    }
    if logits.hop_ms == 0 {
        return Err(CodecError::BadHop { word_id: id() });
    }
    if logits.logits.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CodecError::NonFinite(id()));
    }
    let expected = frame_count(word.duration(), logits.hop_ms);
    let got = logits.logits.len();
    if got.abs_diff(expected) > 1 {
        return Err(CodecError::LengthMismatch {
            word_id: id(),
            got,
            expected,
        });
    }

    let margins: Vec<f64> = logits.logits.iter().map(|[neg, pos]| pos - neg).collect();
    let labels: Vec<u8> = logits.logits.iter().map(|[neg, pos]| u8::from(pos > neg)).collect();
    let spans = runs(&labels);
    let (a, b) = match spans.iter().copied().reduce(|best, s| if s.1 - s.0 > best.1 - best.0 { s } else { best }) {
        Some(s) => s,
        None => {
            let i = crate::svm::argmax(&margins).expect("non-empty");
            (i, i + 1)
        }
    };
    let score = margins[a..b].iter().sum::<f64>() / (b - a) as f64;
    Ok(PredictionRecord {
        word_id: id(),
        predicted_index: closest_nucleus(word, logits.hop_ms, a, b),
        gold_index: word.stress_index,
        n_nuclei: word.nuclei.len(),
        score,
    })
}

/// One-hot logits for a label sequence.
pub fn one_hot(seq: &FrameLabelSeq) -> FrameLogitSeq {
    FrameLogitSeq {
        word_id: seq.word_id.clone(),
        hop_ms: seq.hop_ms,
        logits: seq
            .labels
            .iter()
            .map(|&l| if l == 1 { [0.0, 1.0] } else { [1.0, 0.0] })
            .collect(),
    }
}

/// Whether every nucleus of the word holds at least one frame midpoint.
pub fn nuclei_resolvable(word: &WordRecord) -> bool {
    let n = frame_count(word.duration(), HOP_MS);
    word.nuclei.iter().all(|nu| frames_in(word.t0, n, HOP_MS, nu).next().is_some())
}

/// Decoding the encoder's own labels recovers the gold index.
pub fn roundtrip_check(word: &WordRecord) -> bool {
    let Ok(enc) = encode_labels(word) else {
        return false;
    };
    match decode_logits(&one_hot(&enc.seq), word) {
        Ok(p) => Some(p.predicted_index) == word.stress_index,
        Err(_) => false,
    }
}

pub fn read_logits(path: impl AsRef<Path>) -> Result<Vec<FrameLogitSeq>, CodecError> {
    Ok(jsonl::read(path)?)
}

pub fn write_logits(path: impl AsRef<Path>, seqs: &[FrameLogitSeq]) -> Result<(), CodecError> {
    Ok(jsonl::write(path, seqs)?)
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, CodecError> {
    Ok(jsonl::read(path)?)
}

pub fn write_predictions(path: impl AsRef<Path>, preds: &[PredictionRecord]) -> Result<(), CodecError> {
    Ok(jsonl::write(path, preds)?)
}
