//! Pitch, intensity and sonority contours.
//!
//! All three contours are sampled on one frame grid: a 10 ms hop with frame
//! `i` centred at `start_s + i * hop_s`. The grid is laid out for the
//! longest analysis window (40 ms, pitch), so a clip shorter than 40 ms
//! produces empty tracks. Each contour then takes its own window centred on
//! the shared frame times.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;

pub const HOP_S: f64 = 0.010;
pub const PITCH_WINDOW_S: f64 = 0.040;
pub const INTENSITY_WINDOW_S: f64 = 0.030;
pub const SONORITY_WINDOW_S: f64 = 0.030;

pub const PITCH_FLOOR_HZ: f64 = 75.0;
pub const PITCH_CEILING_HZ: f64 = 500.0;
pub const VOICING_THRESHOLD: f64 = 0.45;

/// Reference pressure for the dB scale, with full scale taken as 1.0.
pub const INTENSITY_REF: f64 = 2e-5;
const RMS_FLOOR: f64 = 1e-6;

pub const SONORITY_BAND_HZ: (f64, f64) = (300.0, 2300.0);

/// Frames quieter than this RMS are never voiced.
const SILENCE_RMS: f64 = 1e-5;

/// Candidate peaks within this fraction of the best one are preferred when
/// they sit at a shorter lag (guards against octave-down errors).
const PEAK_PREFERENCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackFrame {
    pub value: f64,
    pub voiced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub hop_s: f64,
    pub start_s: f64,
    pub values: Vec<TrackFrame>,
}

impl Track {
    pub fn time(&self, i: usize) -> f64 {
        self.start_s + i as f64 * self.hop_s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodyTracks {
    pub pitch: Track,
    pub intensity: Track,
    pub sonority: Track,
}

impl ProsodyTracks {
    pub fn compute(clip: &AudioClip) -> Self {
        ProsodyTracks {
            pitch: pitch_contour(clip),
            intensity: intensity_contour(clip),
            sonority: sonority_contour(clip),
        }
    }
}

fn samples_for(seconds: f64, rate: u32) -> usize {
    (seconds * rate as f64).round() as usize
}

/// The shared frame grid of a clip.
#[derive(Debug, Clone, Copy)]
struct Grid {
    hop: usize,
    span: usize,
    n_frames: usize,
    start_s: f64,
    hop_s: f64,
}

impl Grid {
    fn of(clip: &AudioClip) -> Self {
        let rate = clip.sample_rate_hz;
        let hop = samples_for(HOP_S, rate).max(1);
        let span = samples_for(PITCH_WINDOW_S, rate).max(1);
        let n = clip.samples.len();
        let n_frames = if n >= span { (n - span) / hop + 1 } else { 0 };
        Grid {
            hop,
            span,
            n_frames,
            start_s: clip.origin_s + span as f64 / 2.0 / rate as f64,
            hop_s: hop as f64 / rate as f64,
        }
    }

    /// Sample range of a `width`-sample window centred on frame `i`.
    fn window(&self, i: usize, width: usize) -> std::ops::Range<usize> {
        let start = i * self.hop + (self.span - width.min(self.span)) / 2;
        start..start + width.min(self.span)
    }

    fn track(&self, values: Vec<TrackFrame>) -> Track {
        Track {
            hop_s: self.hop_s,
            start_s: self.start_s,
            values,
        }
    }
}

fn hann(width: usize) -> Vec<f64> {
    (0..width)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * (n as f64 + 0.5) / width as f64).cos())
        .collect()
}

fn weighted_rms(frame: &[f64], window: &[f64]) -> f64 {
    let (num, den) = frame
        .iter()
        .zip(window)
        .fold((0.0, 0.0), |(num, den), (x, w)| (num + w * x * x, den + w));
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// Converts an RMS amplitude to the intensity scale used by the contours.
pub fn rms_to_db(rms: f64) -> f64 {
    (20.0 * (rms.max(RMS_FLOOR) / INTENSITY_REF).log10()).max(0.0)
}

/// Hann-weighted RMS in dB (30 ms window, 10 ms hop), floored at 0 dB.
pub fn intensity_contour(clip: &AudioClip) -> Track {
    let grid = Grid::of(clip);
    let width = samples_for(INTENSITY_WINDOW_S, clip.sample_rate_hz).max(1);
    let window = hann(width.min(grid.span));
    let values = (0..grid.n_frames)
        .map(|i| TrackFrame {
            value: rms_to_db(weighted_rms(&clip.samples[grid.window(i, width)], &window)),
            voiced: true,
        })
        .collect();
    grid.track(values)
}

/// Normalized-autocorrelation pitch (40 ms window, 10 ms hop, 75–500 Hz).
///
/// For each candidate lag the correlation is normalized by the energies of
/// the two overlapping segments, so a perfectly periodic frame scores 1 at
/// its period. Among local maxima, the shortest lag within
/// [`PEAK_PREFERENCE`] of the best score wins, and parabolic interpolation
/// refines it. A frame is voiced iff that peak reaches
/// [`VOICING_THRESHOLD`].
pub fn pitch_contour(clip: &AudioClip) -> Track {
    let grid = Grid::of(clip);
    let rate = clip.sample_rate_hz as f64;
    let width = samples_for(PITCH_WINDOW_S, clip.sample_rate_hz).max(1);
    let min_lag = ((rate / PITCH_CEILING_HZ).floor() as usize).max(2);
    let max_lag = (rate / PITCH_FLOOR_HZ).ceil() as usize;
    let values = (0..grid.n_frames)
        .map(|i| pitch_of_frame(&clip.samples[grid.window(i, width)], rate, min_lag, max_lag))
        .collect();
    grid.track(values)
}

fn pitch_of_frame(raw: &[f64], rate: f64, min_lag: usize, max_lag: usize) -> TrackFrame {
    const UNVOICED: TrackFrame = TrackFrame {
        value: 0.0,
        voiced: false,
    };
    let n = raw.len();
    if max_lag + 2 >= n {
        return UNVOICED;
    }
    let mean = raw.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &x {
        prefix.push(prefix.last().unwrap() + v * v);
    }
    if (prefix[n] / n as f64).sqrt() < SILENCE_RMS {
        return UNVOICED;
    }

    let corr = |lag: usize| -> f64 {
        let m = n - lag;
        let cross: f64 = x[..m].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
        let e1 = prefix[m];
        let e2 = prefix[n] - prefix[lag];
        let denom = (e1 * e2).sqrt();
        if denom > 0.0 {
            cross / denom
        } else {
            0.0
        }
    };
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1).map(corr).collect();
    let at = |lag: usize| r[lag + 1 - min_lag];

    let peaks: Vec<usize> = (min_lag..=max_lag)
        .filter(|&lag| at(lag) > at(lag - 1) && at(lag) >= at(lag + 1))
        .collect();
    let Some(best) = peaks.iter().map(|&l| at(l)).reduce(f64::max) else {
        return UNVOICED;
    };
    if !(best >= VOICING_THRESHOLD) {
        return UNVOICED;
    }
    let lag = peaks
        .iter()
        .copied()
        .find(|&l| at(l) >= PEAK_PREFERENCE * best)
        .expect("best peak qualifies");
    let peak = at(lag);
    if peak < VOICING_THRESHOLD {
        return UNVOICED;
    }

    let (y0, y1, y2) = (at(lag - 1), peak, at(lag + 1));
    let curvature = y0 - 2.0 * y1 + y2;
    let shift = if curvature < 0.0 {
        (0.5 * (y0 - y2) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let f0 = rate / (lag as f64 + shift);
    if !(PITCH_FLOOR_HZ..=PITCH_CEILING_HZ).contains(&f0) {
        return UNVOICED;
    }
    TrackFrame {
        value: f0,
        voiced: true,
    }
}

struct Spectrum {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    buf: Vec<Complex<f64>>,
}

impl Spectrum {
    fn new(width: usize) -> Self {
        Spectrum {
            fft: FftPlanner::new().plan_fft_forward(width),
            window: hann(width),
            buf: vec![Complex::default(); width],
        }
    }

    /// Fraction of one-sided spectral energy in `band`.
    fn band_fraction(&mut self, frame: &[f64], rate: f64, band: (f64, f64)) -> f64 {
        let width = self.window.len();
        for ((slot, x), w) in self.buf.iter_mut().zip(frame).zip(&self.window) {
            *slot = Complex::new(x * w, 0.0);
        }
        self.fft.process(&mut self.buf);
        let (mut total, mut in_band) = (0.0, 0.0);
        for k in 0..=width / 2 {
            let p = self.buf[k].norm_sqr();
            total += p;
            let f = k as f64 * rate / width as f64;
            if f >= band.0 && f <= band.1 {
                in_band += p;
            }
        }
        if total > 0.0 {
            in_band / total
        } else {
            0.0
        }
    }
}

/// Frame RMS times the share of spectral energy in 300–2300 Hz.
pub fn sonority_contour(clip: &AudioClip) -> Track {
    let grid = Grid::of(clip);
    let width = samples_for(SONORITY_WINDOW_S, clip.sample_rate_hz).max(1).min(grid.span);
    let mut spectrum = Spectrum::new(width);
    let rate = clip.sample_rate_hz as f64;
    let values = (0..grid.n_frames)
        .map(|i| {
            let frame = &clip.samples[grid.window(i, width)];
            let rms = weighted_rms(frame, &spectrum.window);
            let value = if rms > 0.0 {
                rms * spectrum.band_fraction(frame, rate, SONORITY_BAND_HZ)
            } else {
                0.0
            };
            TrackFrame { value, voiced: true }
        })
        .collect();
    grid.track(values)
}

/// Band fraction of a single frame; exposed for diagnostics.
pub fn band_fraction(frame: &[f64], rate: u32) -> f64 {
    Spectrum::new(frame.len()).band_fraction(frame, rate as f64, SONORITY_BAND_HZ)
}

/// One line of a per-word contour dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub time: f64,
    pub pitch: f64,
    pub voiced: bool,
    pub intensity: f64,
    pub sonority: f64,
}

pub fn contour_rows(tracks: &ProsodyTracks) -> Vec<ContourRow> {
    (0..tracks.intensity.len())
        .map(|i| ContourRow {
            time: tracks.intensity.time(i),
            pitch: tracks.pitch.values[i].value,
            voiced: tracks.pitch.values[i].voiced,
            intensity: tracks.intensity.values[i].value,
            sonority: tracks.sonority.values[i].value,
        })
        .collect()
}
