//! Evaluation: word accuracy with bootstrap intervals, stress-position
//! confusion, annotator agreement and lexical stress analyses.

pub mod agreement;
pub mod analysis;
pub mod bootstrap;
pub mod confusion;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framecodec::PredictionRecord;
pub use agreement::{agreement_report, krippendorff_alpha, observed_agreement, AgreementReport};
pub use analysis::{crosslingual_overlap, stress_variation, Overlap, StressVariation};
pub use bootstrap::{bootstrap_ci, bootstrap_ci_levels};
pub use confusion::{confusion_matrix, ConfusionMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no items to evaluate")]
    Empty,
    #[error("prediction for {0} has no gold index")]
    MissingGold(String),
    #[error("confidence level must lie in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("resample count must be positive")]
    NoResamples,
    #[error("annotation sets share no items")]
    NoCommonItems,
    #[error("need at least 2 items with at least one doubly annotated")]
    TooFewPairs,
    #[error("alpha is undefined: every annotation has the same value")]
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub n_words: usize,
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        format!(
            "{:<12} {:>8} {:>9} {:>9} {:>9}\n{:<12} {:>8} {:>9.4} {:>9.4} {:>9.4}\n",
            "dataset",
            "words",
            "accuracy",
            "ci_low",
            "ci_high",
            if self.dataset.is_empty() { "-" } else { &self.dataset },
            self.n_words,
            self.accuracy,
            self.ci_low,
            self.ci_high
        )
    }
}

/// Per-word correctness; every record must carry a gold index.
pub fn correctness(preds: &[PredictionRecord]) -> Result<Vec<bool>, MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    preds
        .iter()
        .map(|p| {
            p.gold_index
                .map(|g| g == p.predicted_index)
                .ok_or_else(|| MetricsError::MissingGold(p.word_id.clone()))
        })
        .collect()
}

/// Share of words whose predicted index equals the gold index.
pub fn word_accuracy(preds: &[PredictionRecord]) -> Result<f64, MetricsError> {
    let c = correctness(preds)?;
    Ok(c.iter().filter(|&&b| b).count() as f64 / c.len() as f64)
}

/// Accuracy with a percentile bootstrap interval.
pub fn evaluate(
    preds: &[PredictionRecord],
    dataset: &str,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<EvalReport, MetricsError> {
    let c = correctness(preds)?;
    let accuracy = c.iter().filter(|&&b| b).count() as f64 / c.len() as f64;
    let (ci_low, ci_high) = bootstrap_ci(&c, level, resamples, seed)?;
    Ok(EvalReport {
        dataset: dataset.to_string(),
        n_words: c.len(),
        accuracy,
        ci_low: ci_low.min(accuracy),
        ci_high: ci_high.max(accuracy),
        level,
        resamples,
        seed,
    })
}
