// Generators and independent oracles shared by the integration tests and
// the acceptance runner. Nothing here calls the code it checks, apart from
// building inputs.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stresskit::corpus::{Gender, Interval, NucleusSpan, Point, TextGridDoc, Tier, WordRecord};
use stresskit::prosody::{ProsodyTracks, Track, TrackFrame};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- TextGrid

pub const FIXTURES: [&str; 5] = [
    "long_form.TextGrid",
    "short_form.TextGrid",
    "point_tier.TextGrid",
    "escaped_labels.TextGrid",
    "utf16_short.TextGrid",
];

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

const LABEL_CHARS: &[char] = &['a', 'e', 'i', 'o', 'u', 'r', 'č', 'ć', 'ž', 'š', 'đ', 'ʎ', 'ɲ', '"', ' ', '?', '1', 'X'];

fn random_label(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.3) {
        return String::new();
    }
    let n = rng.random_range(1..8);
    (0..n).map(|_| LABEL_CHARS[rng.random_range(0..LABEL_CHARS.len())]).collect()
}

/// Times with awkward binary expansions, plus some round ones.
fn random_time(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if rng.random_bool(0.2) {
        ((lo + (hi - lo) * rng.random::<f64>()) * 100.0).round() / 100.0
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

fn sorted_times(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|_| random_time(rng, lo, hi).clamp(lo, hi)).collect();
    t.sort_by(f64::total_cmp);
    t
}

pub fn random_grid(rng: &mut ChaCha8Rng) -> TextGridDoc {
    let xmin = if rng.random_bool(0.5) { 0.0 } else { random_time(rng, 0.0, 3.0) };
    let xmax = xmin + 0.05 + rng.random::<f64>() * 20.0;
    let mut doc = TextGridDoc::new(xmin, xmax);
    for k in 0..rng.random_range(0..5) {
        let name = format!("tier{k}{}", random_label(rng));
        if rng.random_bool(0.7) {
            let m = rng.random_range(0..12);
            let cuts = sorted_times(rng, m, xmin, xmax);
            let mut edges = vec![xmin];
            edges.extend(cuts.into_iter().filter(|&t| t > xmin && t < xmax));
            edges.push(xmax);
            edges.dedup();
            let intervals = edges
                .windows(2)
                .map(|w| Interval::new(w[0], w[1], random_label(rng)))
                .collect();
            doc.tiers.push(Tier::interval_tier(name, xmin, xmax, intervals));
        } else {
            let m = rng.random_range(0..8);
            let points = sorted_times(rng, m, xmin, xmax)
                .into_iter()
                .map(|time| Point {
                    time,
                    text: random_label(rng),
                })
                .collect();
            doc.tiers.push(Tier::point_tier(name, xmin, xmax, points));
        }
    }
    doc
}

// ---------------------------------------------------------------- features

fn random_track(rng: &mut ChaCha8Rng, n: usize, start: f64, kind: usize) -> Track {
    let all_zero = kind == 2 && rng.random_bool(0.05);
    let values = (0..n)
        .map(|_| match kind {
            0 => {
                let voiced = rng.random_bool(0.75);
                TrackFrame {
                    value: if voiced { rng.random_range(80.0..320.0) } else { 0.0 },
                    voiced,
                }
            }
            1 => TrackFrame {
                value: rng.random_range(25.0..85.0),
                voiced: true,
            },
            _ => TrackFrame {
                value: if all_zero { 0.0 } else { rng.random_range(0.0..1.0) },
                voiced: true,
            },
        })
        .collect();
    Track {
        hop_s: 0.01,
        start_s: start,
        values,
    }
}

pub struct FeatureCase {
    pub tracks: ProsodyTracks,
    pub word: (f64, f64),
    pub nuclei: Vec<NucleusSpan>,
}

/// Stored contour numbers for one word with 2 to 4 nuclei; some nuclei are
/// shorter than a hop, some pitch tracks barely voiced.
pub fn random_feature_case(rng: &mut ChaCha8Rng) -> FeatureCase {
    let n = rng.random_range(25..90);
    let start = rng.random_range(0.0..0.03);
    let mut tracks = ProsodyTracks {
        pitch: random_track(rng, n, start, 0),
        intensity: random_track(rng, n, start, 1),
        sonority: random_track(rng, n, start, 2),
    };
    if rng.random_bool(0.1) {
        for f in &mut tracks.pitch.values {
            f.voiced = false;
            f.value = 0.0;
        }
    }
    let span = start + (n - 1) as f64 * 0.01;
    let w0 = rng.random_range(0.0..span * 0.3);
    let w1 = rng.random_range(span * 0.7..span + 0.01);
    let k = rng.random_range(2..=4);
    let cuts = sorted_times(rng, 2 * k, w0, w1);
    let mut nuclei = Vec::new();
    for i in 0..k {
        let (a, mut b) = (cuts[2 * i], cuts[2 * i + 1]);
        if rng.random_bool(0.15) {
            b = (a + rng.random_range(0.001..0.009)).min(w1);
        }
        if b <= a {
            b = a + 1e-4;
        }
        nuclei.push(NucleusSpan {
            t0: a,
            t1: b,
            syllable_index: i,
        });
    }
    FeatureCase {
        tracks,
        word: (w0, w1),
        nuclei,
    }
}

/// Direct recomputation of one contour's three prominence ratios.
/// `None` means the contour is neutral for this nucleus.
pub fn oracle_prominence(track: &Track, word: (f64, f64), nucleus: &NucleusSpan, voiced_only: bool) -> Option<[f64; 3]> {
    let usable = |i: usize| !voiced_only || track.values[i].voiced;
    let t = |i: usize| track.start_s + i as f64 * track.hop_s;

    let mut word_sum = 0.0;
    let mut word_n = 0usize;
    for i in 0..track.values.len() {
        if usable(i) && t(i) >= word.0 && t(i) < word.1 {
            word_sum += track.values[i].value;
            word_n += 1;
        }
    }
    if word_n == 0 {
        return None;
    }
    let word_mean = word_sum / word_n as f64;
    if word_mean <= 0.0 {
        return None;
    }

    let mut knots: Vec<(f64, f64)> = (0..track.values.len())
        .filter(|&i| usable(i) && t(i) >= nucleus.t0 && t(i) < nucleus.t1)
        .map(|i| (t(i), track.values[i].value))
        .collect();
    if knots.is_empty() {
        let mid = (nucleus.t0 + nucleus.t1) / 2.0;
        let mut best = 0;
        for i in 1..track.values.len() {
            if (t(i) - mid).abs() < (t(best) - mid).abs() {
                best = i;
            }
        }
        if !usable(best) {
            return None;
        }
        knots.push((t(best), track.values[best].value));
    }

    let mean = knots.iter().map(|k| k.1).sum::<f64>() / knots.len() as f64;
    let peak = knots.iter().map(|k| k.1).fold(f64::MIN, f64::max);

    // Trapezoids over the knots with the nucleus edges added as flat ends.
    let mut curve = vec![(nucleus.t0, knots[0].1)];
    curve.extend(knots.iter().copied().filter(|k| k.0 > nucleus.t0 && k.0 < nucleus.t1));
    curve.push((nucleus.t1, knots[knots.len() - 1].1));
    let mut integral = 0.0;
    for w in curve.windows(2) {
        integral += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
    }
    let auc = integral / (nucleus.t1 - nucleus.t0);
    Some([auc / word_mean, mean / word_mean, peak / word_mean])
}

/// All ten features and the three neutral flags.
pub fn oracle_features(tracks: &ProsodyTracks, word: (f64, f64), nucleus: &NucleusSpan) -> ([f64; 10], [bool; 3]) {
    let p = oracle_prominence(&tracks.pitch, word, nucleus, true);
    let i = oracle_prominence(&tracks.intensity, word, nucleus, false);
    let s = oracle_prominence(&tracks.sonority, word, nucleus, false);
    let flags = [p.is_none(), i.is_none(), s.is_none()];
    let (p, i, s) = (p.unwrap_or([1.0; 3]), i.unwrap_or([1.0; 3]), s.unwrap_or([1.0; 3]));
    (
        [p[0], p[1], p[2], i[0], i[1], i[2], s[0], s[1], s[2], nucleus.t1 - nucleus.t0],
        flags,
    )
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(1e-300)
    }
}

// ---------------------------------------------------------------- SVM dual

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp()
}

/// Projection onto {a : y.a = 0, 0 <= a <= c}: a = clip(v - lambda*y), with
/// lambda found by bisection on the monotone map lambda -> y.a.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(&vi, &yi)| (vi - lam * yi).clamp(0.0, c)).collect() };
    let dot = |a: &[f64]| a.iter().zip(y).map(|(x, y)| x * y).sum::<f64>();
    let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dot(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// e.a - a'Qa/2
    pub objective: f64,
}

pub fn dual_objective(q: &[Vec<f64>], a: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            quad += a[i] * q[i][j] * a[j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Accelerated projected gradient on the dense dual with adaptive restart.
pub fn dense_dual(k: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> DualSolution {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    // Largest eigenvalue by power iteration.
    let mut v = vec![1.0; n];
    let mut lmax = 1.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lmax = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    let step = 1.0 / (lmax * 1.01);
    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0).collect() };

    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut f_prev = -dual_objective(&q, &a);
    for _ in 0..iterations {
        let g = grad(&z);
        let next = project(&z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect::<Vec<_>>(), y, c);
        let f = -dual_objective(&q, &next);
        if f > f_prev {
            // Restart momentum.
            t = 1.0;
            z = a.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next
            .iter()
            .zip(&a)
            .map(|(x, xp)| x + (t - 1.0) / t_next * (x - xp))
            .collect();
        a = next;
        t = t_next;
        f_prev = f;
    }

    // Bias from the free vectors, else the middle of the feasible range.
    let g = grad(&a);
    let eps = 1e-8 * c;
    let free: Vec<f64> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).map(|i| -y[i] * g[i]).collect();
    let bias = if free.is_empty() {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let val = -y[i] * g[i];
            let upper_side = (y[i] > 0.0 && a[i] < c - eps) || (y[i] < 0.0 && a[i] > eps);
            if upper_side {
                hi = hi.min(val);
            } else {
                lo = lo.max(val);
            }
        }
        let (lo, hi) = (lo.min(hi), hi.max(lo));
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo
        } else {
            hi
        }
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    let objective = dual_objective(&q, &a);
    DualSolution { alpha: a, bias, objective }
}

pub fn kernel_matrix(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter().map(|a| x.iter().map(|b| rbf(a, b, gamma)).collect()).collect()
}

/// Two overlapping Gaussian classes in 2 to 5 dimensions.
pub fn random_svm_set(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let d = rng.random_range(2..=5);
    let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let l = (i % 2) as u8;
        let row: Vec<f64> = (0..d)
            .map(|j| {
                let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                g + if l == 1 { shift[j] } else { 0.0 }
            })
            .collect();
        x.push(row);
        labels.push(l);
    }
    (x, labels)
}

/// XOR pattern: four clusters, opposite corners share a class.
pub fn xor_set(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let (sx, sy) = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)][i % 4];
        x.push(vec![sx + rng.random_range(-0.3..0.3), sy + rng.random_range(-0.3..0.3)]);
        labels.push(u8::from(sx * sy > 0.0));
    }
    (x, labels)
}

pub struct SvmComparison {
    pub sign_mismatches: usize,
    pub objective_diff: f64,
    pub max_kkt: f64,
    pub coef_sum: f64,
}

/// Trains with `stresskit::svm::fit` (no standardization, fixed gamma) and
/// compares with the dense solver on the same kernel.
pub fn compare_with_dense(x: &[Vec<f64>], labels: &[u8], c: f64, gamma: f64) -> SvmComparison {
    use stresskit::svm::{fit, Gamma, KernelKind, SvmParams};
    let params = SvmParams {
        c,
        gamma: Gamma::Value(gamma),
        kernel: KernelKind::Rbf,
        standardize: false,
        platt: false,
        ..SvmParams::default()
    };
    let rep = fit(x, labels, &params).expect("training succeeds");
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let k = kernel_matrix(x, gamma);
    let q: Vec<Vec<f64>> = (0..y.len()).map(|i| (0..y.len()).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let dense = dense_dual(&k, &y, c, 20_000);

    let mut mismatches = 0;
    let mut max_kkt: f64 = 0.0;
    for i in 0..x.len() {
        let f_smo = rep.model.decision_value(&x[i]);
        let f_dense: f64 = (0..x.len()).map(|j| dense.alpha[j] * y[j] * k[i][j]).sum::<f64>() + dense.bias;
        if f_smo.signum() != f_dense.signum() {
            mismatches += 1;
        }
        let m = y[i] * f_smo;
        let a = rep.alpha[i];
        let r = if a <= 0.0 {
            (1.0 - m).max(0.0)
        } else if a >= c {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        max_kkt = max_kkt.max(r);
    }
    SvmComparison {
        sign_mismatches: mismatches,
        objective_diff: (dual_objective(&q, &rep.alpha) - dense.objective).abs(),
        max_kkt,
        coef_sum: rep.model.dual_coefs.iter().sum(),
    }
}

// ---------------------------------------------------------------- codec

/// A random word of 2 to 5 nuclei. With `resolvable`, every nucleus is at
/// least 20 ms long, which guarantees it holds a frame midpoint.
pub fn random_word(rng: &mut ChaCha8Rng, id: usize, resolvable: bool) -> WordRecord {
    let t0 = rng.random_range(0.0..5.0);
    let k = rng.random_range(2..=5);
    let min_len = if resolvable { 0.02 } else { 0.001 };
    let mut t = t0 + rng.random_range(0.0..0.1);
    let mut nuclei = Vec::new();
    for i in 0..k {
        let len = rng.random_range(min_len..0.2);
        nuclei.push(NucleusSpan {
            t0: t,
            t1: t + len,
            syllable_index: i,
        });
        t += len + rng.random_range(0.0..0.1);
    }
    let t1 = nuclei[k - 1].t1 + rng.random_range(0.0..0.1);
    WordRecord {
        word_id: format!("w{id:05}"),
        text: "x".into(),
        audio_path: "a.wav".into(),
        t0,
        t1,
        nuclei,
        stress_index: Some(rng.random_range(0..k)),
        speaker_id: "s".into(),
        gender: Gender::Unknown,
        dataset: "fuzz".into(),
    }
}

/// Frames whose midpoint lies in `[a, b)`, recomputed from scratch.
pub fn frames_with_midpoint_in(word_t0: f64, n_frames: usize, a: f64, b: f64) -> Vec<usize> {
    (0..n_frames)
        .filter(|&i| {
            let mid = word_t0 + 0.02 * i as f64 + 0.01;
            a <= mid && mid < b
        })
        .collect()
}

// ---------------------------------------------------------------- agreement

pub fn two_coder_units(a: &[usize], b: &[usize]) -> BTreeMap<String, Vec<usize>> {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (&x, &y))| (format!("item{i:05}"), vec![x, y]))
        .collect()
}

/// Ten items, two coders, two disagreements (items 7 and 10).
/// Value totals: n0 = 6, n1 = 7, n2 = 7, n = 20.
/// alpha = 1 - (n - 1) * 4 / (400 - 36 - 49 - 49) = 1 - 76/266 = 5/7.
pub const ALPHA_FIXTURE_A: [usize; 10] = [0, 0, 1, 1, 2, 2, 0, 1, 2, 0];
pub const ALPHA_FIXTURE_B: [usize; 10] = [0, 0, 1, 1, 2, 2, 1, 1, 2, 2];
pub const ALPHA_FIXTURE_VALUE: f64 = 5.0 / 7.0;

/// Two coders drawing independently from the same skewed marginal.
pub fn chance_coders(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>) {
    let draw = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.random();
        if u < 0.6 {
            0
        } else if u < 0.9 {
            1
        } else {
            2
        }
    };
    let a = (0..n).map(|_| draw(rng)).collect();
    let b = (0..n).map(|_| draw(rng)).collect();
    (a, b)
}

// ---------------------------------------------------------------- bootstrap

pub fn bernoulli_sample(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(p)).collect()
}

/// 1.96 * sqrt(p(1-p)/n)
pub fn normal_half_width(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}
