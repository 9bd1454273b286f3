//! PCM audio clips: WAV loading, linear resampling and slicing.

use std::path::Path;

use thiserror::Error;

/// Internal analysis rate. At 16 kHz a 20 ms frame is exactly 320 samples.
pub const CANONICAL_RATE: u32 = 16_000;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{path}: not a readable RIFF/WAVE file: {message}")]
    NotWav { path: String, message: String },
    #[error("{path}: unsupported {field}: {value}")]
    Unsupported {
        path: String,
        field: &'static str,
        value: String,
    },
    #[error("{path}: non-finite sample at index {index}")]
    NonFinite { path: String, index: usize },
    #[error("target sample rate must be positive")]
    ZeroRate,
    #[error("cannot resample an empty clip")]
    EmptyClip,
    #[error("slice [{t0}, {t1}] outside clip of duration {duration}")]
    OutOfRange { t0: f64, t1: f64, duration: f64 },
    #[error("{path}: {message}")]
    Write { path: String, message: String },
}

/// Mono audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    /// Absolute time of sample 0 in the source recording.
    pub origin_s: f64,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        AudioClip {
            samples,
            sample_rate_hz,
            origin_s: 0.0,
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Absolute time of sample `i`.
    pub fn time_of(&self, i: usize) -> f64 {
        self.origin_s + i as f64 / self.sample_rate_hz as f64
    }
}

/// Loads a RIFF/WAVE file as a mono clip.
///
/// 16-bit integer and 32-bit float PCM are accepted; stereo is averaged.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let p = path.display().to_string();
    let mut reader = hound::WavReader::open(path).map_err(|e| AudioError::NotWav {
        path: p.clone(),
        message: e.to_string(),
    })?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(AudioError::Unsupported {
            path: p,
            field: "channels",
            value: spec.channels.to_string(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>(),
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>(),
        (fmt, bits) => {
            let field = if matches!(fmt, hound::SampleFormat::Int) || bits != 32 {
                "bits_per_sample"
            } else {
                "sample_format"
            };
            return Err(AudioError::Unsupported {
                path: p,
                field,
                value: format!("{fmt:?}/{bits}"),
            });
        }
    }
    .map_err(|e| AudioError::NotWav {
        path: p.clone(),
        message: e.to_string(),
    })?;

    if let Some(index) = interleaved.iter().position(|x| !x.is_finite()) {
        return Err(AudioError::NonFinite { path: p, index });
    }
    let channels = spec.channels as usize;
    let samples = interleaved
        .chunks_exact(channels)
        .map(|frame| (frame.iter().sum::<f64>() / channels as f64).clamp(-1.0, 1.0))
        .collect();
    Ok(AudioClip::new(samples, spec.sample_rate))
}

/// Loads a WAV file and resamples it to [`CANONICAL_RATE`].
pub fn load_canonical(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let clip = load_wav(path)?;
    if clip.is_empty() || clip.sample_rate_hz == CANONICAL_RATE {
        return Ok(AudioClip {
            sample_rate_hz: if clip.is_empty() { CANONICAL_RATE } else { clip.sample_rate_hz },
            ..clip
        });
    }
    resample_linear(&clip, CANONICAL_RATE)
}

/// Writes a mono 16-bit PCM WAV file.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), AudioError> {
    let path = path.as_ref();
    let err = |e: hound::Error| AudioError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(err)?;
    for &x in &clip.samples {
        let v = (x.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v).map_err(err)?;
    }
    w.finalize().map_err(err)
}

/// Linear-interpolation resampling.
///
/// Output sample `k` sits at time `k / target_hz`; its value interpolates
/// the two neighbouring input samples (the last input sample is held past
/// the end).
pub fn resample_linear(clip: &AudioClip, target_hz: u32) -> Result<AudioClip, AudioError> {
    if target_hz == 0 {
        return Err(AudioError::ZeroRate);
    }
    if clip.is_empty() {
        return Err(AudioError::EmptyClip);
    }
    if target_hz == clip.sample_rate_hz {
        return Ok(clip.clone());
    }
    let src = &clip.samples;
    let ratio = clip.sample_rate_hz as f64 / target_hz as f64;
    let n_out = ((src.len() as f64) * target_hz as f64 / clip.sample_rate_hz as f64).round() as usize;
    let last = src.len() - 1;
    let samples = (0..n_out)
        .map(|k| {
            let pos = k as f64 * ratio;
            let i = pos.floor() as usize;
            if i >= last {
                return src[last];
            }
            let frac = pos - i as f64;
            src[i] + (src[i + 1] - src[i]) * frac
        })
        .collect();
    Ok(AudioClip {
        samples,
        sample_rate_hz: target_hz,
        origin_s: clip.origin_s,
    })
}

/// Extracts `[t0, t1)` (seconds relative to the clip origin).
///
/// The first sample is `round(t0 * rate)` and the length is
/// `round((t1 - t0) * rate)`.
pub fn slice(clip: &AudioClip, t0: f64, t1: f64) -> Result<AudioClip, AudioError> {
    let duration = clip.duration();
    let tol = 1e-9;
    if !(t0.is_finite() && t1.is_finite()) || t0 < -tol || t1 < t0 || t1 > duration + tol {
        return Err(AudioError::OutOfRange { t0, t1, duration });
    }
    let rate = clip.sample_rate_hz as f64;
    let start = ((t0.max(0.0)) * rate).round() as usize;
    let count = ((t1 - t0) * rate).round() as usize;
    let start = start.min(clip.samples.len());
    let end = (start + count).min(clip.samples.len());
    Ok(AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate_hz: clip.sample_rate_hz,
        origin_s: clip.origin_s + t0,
    })
}

/// Slices using absolute recording times, clamping to the available audio.
pub fn slice_absolute_clamped(clip: &AudioClip, t0: f64, t1: f64) -> Result<AudioClip, AudioError> {
    let a = (t0 - clip.origin_s).clamp(0.0, clip.duration());
    let b = (t1 - clip.origin_s).clamp(a, clip.duration());
    slice(clip, a, b)
}
