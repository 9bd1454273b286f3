//! Kernel and C selection on held-out words.

use serde::{Deserialize, Serialize};

use super::{group_by_word, predict_word, train_svm, KernelKind, SvmError, SvmParams, TrainInstance};

pub const GRID_C: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub kernel: KernelKind,
    pub c: f64,
    pub word_accuracy: f64,
    pub n_words: usize,
}

/// Word-level accuracy of `params` trained on `train` and scored on `valid`.
pub fn held_out_accuracy(
    train: &[TrainInstance],
    valid: &[TrainInstance],
    params: &SvmParams,
) -> Result<(f64, usize), SvmError> {
    let model = train_svm(train, params)?;
    let words = group_by_word(valid);
    let mut correct = 0usize;
    for (_, nuclei) in &words {
        let feats: Vec<_> = nuclei.iter().map(|t| t.features).collect();
        let (idx, _) = predict_word(&model, &feats)?;
        if nuclei[idx].label == 1 {
            correct += 1;
        }
    }
    let n = words.len();
    Ok((if n > 0 { correct as f64 / n as f64 } else { 0.0 }, n))
}

/// Evaluates every (kernel, C) combination; the result is in grid order
/// (RBF first, C ascending). Use [`best`] to pick a winner.
pub fn grid_search(
    train: &[TrainInstance],
    valid: &[TrainInstance],
    base: &SvmParams,
) -> Result<Vec<GridPoint>, SvmError> {
    let mut out = Vec::new();
    for kernel in [KernelKind::Rbf, KernelKind::Linear] {
        for c in GRID_C {
            let params = SvmParams {
                kernel,
                c,
                ..base.clone()
            };
            let (word_accuracy, n_words) = held_out_accuracy(train, valid, &params)?;
            out.push(GridPoint {
                kernel,
                c,
                word_accuracy,
                n_words,
            });
        }
    }
    Ok(out)
}

/// Highest accuracy; earlier grid points win ties.
pub fn best(points: &[GridPoint]) -> Option<&GridPoint> {
    points
        .iter()
        .fold(None, |acc: Option<&GridPoint>, p| match acc {
            Some(b) if b.word_accuracy >= p.word_accuracy => Some(b),
            _ => Some(p),
        })
}
