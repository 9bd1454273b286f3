//! Percentile bootstrap for a mean of 0/1 outcomes.
//!
//! Resampling `n` words with replacement from a set with `k` correct ones
//! gives a correct-count distributed as Binomial(n, k/n), so each resample
//! is drawn directly from that distribution instead of index by index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::MetricsError;

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Intervals for several levels from one set of resamples, so that wider
/// levels always contain narrower ones.
pub fn bootstrap_ci_levels(
    correct: &[bool],
    levels: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, MetricsError> {
    if correct.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&bad) = levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(MetricsError::BadLevel(bad));
    }
    if resamples == 0 {
        return Err(MetricsError::NoResamples);
    }
    let n = correct.len() as u64;
    let k = correct.iter().filter(|&&b| b).count() as u64;
    let dist = Binomial::new(n, k as f64 / n as f64).expect("probability in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples).map(|_| dist.sample(&mut rng) as f64 / n as f64).collect();
    means.sort_by(f64::total_cmp);
    Ok(levels
        .iter()
        .map(|&l| {
            let tail = (1.0 - l) / 2.0;
            (quantile(&means, tail), quantile(&means, 1.0 - tail))
        })
        .collect())
}

pub fn bootstrap_ci(correct: &[bool], level: f64, resamples: usize, seed: u64) -> Result<(f64, f64), MetricsError> {
    Ok(bootstrap_ci_levels(correct, &[level], resamples, seed)?[0])
}
