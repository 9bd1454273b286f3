//! Nucleus prominence features.
//!
//! For each contour the nucleus area under the curve, mean and peak are
//! divided by the mean of the same contour over the whole word, giving nine
//! scale-free ratios; the nucleus duration is the tenth feature.
//!
//! Frame selection: a frame belongs to an interval when its time (the frame
//! midpoint) lies in `[t0, t1)`. Pitch statistics use voiced frames only.
//! The area is the integral over the nucleus of the piecewise-linear curve
//! through the selected frames, held flat from the nucleus edges to the
//! outermost frames, and is divided by the nucleus duration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::contours::{ProsodyTracks, Track};
use crate::audio::{self, AudioClip};
use crate::corpus::{NucleusSpan, WordRecord};

pub const N_FEATURES: usize = 10;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "pitch_auc_prom",
    "pitch_mean_prom",
    "pitch_peak_prom",
    "int_auc_prom",
    "int_mean_prom",
    "int_peak_prom",
    "son_auc_prom",
    "son_mean_prom",
    "son_peak_prom",
    "duration_s",
];

/// Audio context kept on each side of a word so that the analysis grid
/// covers the word edges.
pub const WORD_PADDING_S: f64 = 0.03;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("nucleus [{t0}, {t1}] is empty")]
    EmptyNucleus { t0: f64, t1: f64 },
    #[error("nucleus [{n0}, {n1}] lies outside word [{w0}, {w1}]")]
    NucleusOutsideWord { n0: f64, n1: f64, w0: f64, w1: f64 },
    #[error("word {0} has no audio frames")]
    NoFrames(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NucleusFeatures {
    pub pitch_auc_prom: f64,
    pub pitch_mean_prom: f64,
    pub pitch_peak_prom: f64,
    pub int_auc_prom: f64,
    pub int_mean_prom: f64,
    pub int_peak_prom: f64,
    pub son_auc_prom: f64,
    pub son_mean_prom: f64,
    pub son_peak_prom: f64,
    pub duration_s: f64,
}

impl NucleusFeatures {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.pitch_auc_prom,
            self.pitch_mean_prom,
            self.pitch_peak_prom,
            self.int_auc_prom,
            self.int_mean_prom,
            self.int_peak_prom,
            self.son_auc_prom,
            self.son_mean_prom,
            self.son_peak_prom,
            self.duration_s,
        ]
    }

    pub fn from_array(v: [f64; N_FEATURES]) -> Self {
        NucleusFeatures {
            pitch_auc_prom: v[0],
            pitch_mean_prom: v[1],
            pitch_peak_prom: v[2],
            int_auc_prom: v[3],
            int_mean_prom: v[4],
            int_peak_prom: v[5],
            son_auc_prom: v[6],
            son_mean_prom: v[7],
            son_peak_prom: v[8],
            duration_s: v[9],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Which contours fell back to the neutral ratio 1.0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFlags {
    pub pitch_neutral: bool,
    pub intensity_neutral: bool,
    pub sonority_neutral: bool,
}

impl QualityFlags {
    pub fn any(&self) -> bool {
        self.pitch_neutral || self.intensity_neutral || self.sonority_neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NucleusMeasurement {
    pub features: NucleusFeatures,
    pub flags: QualityFlags,
}

/// (time, value) pairs of the frames of `track` inside `[t0, t1)`.
fn frames_in(track: &Track, t0: f64, t1: f64, voiced_only: bool) -> Vec<(f64, f64)> {
    (0..track.len())
        .filter(|&i| !voiced_only || track.values[i].voiced)
        .map(|i| (track.time(i), track.values[i].value))
        .filter(|&(t, _)| t >= t0 && t < t1)
        .collect()
}

/// Integral over `[t0, t1]` of the piecewise-linear curve through `pts`,
/// extended flat beyond the first and last points.
fn area(pts: &[(f64, f64)], t0: f64, t1: f64) -> f64 {
    match pts {
        [] => 0.0,
        [(_, v)] => v * (t1 - t0),
        _ => {
            let (first_t, first_v) = pts[0];
            let (last_t, last_v) = pts[pts.len() - 1];
            let inner: f64 = pts
                .windows(2)
                .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
                .sum();
            first_v * (first_t - t0).max(0.0) + inner + last_v * (t1 - last_t).max(0.0)
        }
    }
}

/// Returns (auc, mean, peak) prominence, or `None` when neutral.
fn prominence(track: &Track, word: (f64, f64), nucleus: &NucleusSpan, voiced_only: bool) -> Option<[f64; 3]> {
    let word_pts = frames_in(track, word.0, word.1, voiced_only);
    if word_pts.is_empty() {
        return None;
    }
    let word_mean = word_pts.iter().map(|p| p.1).sum::<f64>() / word_pts.len() as f64;
    if word_mean <= 0.0 {
        return None;
    }

    let mut pts = frames_in(track, nucleus.t0, nucleus.t1, voiced_only);
    if pts.is_empty() {
        // Nucleus shorter than a hop: take the frame nearest its midpoint.
        let mid = nucleus.midpoint();
        let nearest = (0..track.len()).min_by(|&a, &b| {
            (track.time(a) - mid)
                .abs()
                .partial_cmp(&(track.time(b) - mid).abs())
                .expect("finite times")
        })?;
        let f = track.values[nearest];
        if voiced_only && !f.voiced {
            return None;
        }
        pts.push((track.time(nearest), f.value));
    }

    let duration = nucleus.duration();
    let auc = area(&pts, nucleus.t0, nucleus.t1) / duration;
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let peak = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Some([auc / word_mean, mean / word_mean, peak / word_mean])
}

/// Computes the ten features of one nucleus from the word's contours.
pub fn nucleus_features(
    tracks: &ProsodyTracks,
    word: (f64, f64),
    nucleus: &NucleusSpan,
) -> Result<NucleusMeasurement, FeatureError> {
    if !(nucleus.t1 > nucleus.t0) {
        return Err(FeatureError::EmptyNucleus {
            t0: nucleus.t0,
            t1: nucleus.t1,
        });
    }
    let eps = 1e-9;
    if nucleus.t0 < word.0 - eps || nucleus.t1 > word.1 + eps {
        return Err(FeatureError::NucleusOutsideWord {
            n0: nucleus.t0,
            n1: nucleus.t1,
            w0: word.0,
            w1: word.1,
        });
    }

    let neutral = |r: Option<[f64; 3]>| (r.unwrap_or([1.0; 3]), r.is_none());
    let (p, pitch_neutral) = neutral(prominence(&tracks.pitch, word, nucleus, true));
    let (i, intensity_neutral) = neutral(prominence(&tracks.intensity, word, nucleus, false));
    let (s, sonority_neutral) = neutral(prominence(&tracks.sonority, word, nucleus, false));
    let flags = QualityFlags {
        pitch_neutral,
        intensity_neutral,
        sonority_neutral,
    };

    Ok(NucleusMeasurement {
        features: NucleusFeatures::from_array([
            p[0],
            p[1],
            p[2],
            i[0],
            i[1],
            i[2],
            s[0],
            s[1],
            s[2],
            nucleus.duration(),
        ]),
        flags,
    })
}

/// Analyses a word inside its recording and returns one measurement per
/// nucleus, in nucleus order.
pub fn word_features(recording: &AudioClip, word: &WordRecord) -> Result<Vec<NucleusMeasurement>, FeatureError> {
    let clip = audio::slice_absolute_clamped(recording, word.t0 - WORD_PADDING_S, word.t1 + WORD_PADDING_S)
        .map_err(|_| FeatureError::NoFrames(word.word_id.clone()))?;
    let tracks = ProsodyTracks::compute(&clip);
    if tracks.intensity.is_empty() {
        return Err(FeatureError::NoFrames(word.word_id.clone()));
    }
    word.nuclei
        .iter()
        .map(|n| nucleus_features(&tracks, (word.t0, word.t1), n))
        .collect()
}
