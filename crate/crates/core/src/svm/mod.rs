//! Binary nucleus classifier: a C-SVC trained with SMO, applied per word by
//! taking the nucleus with the largest decision value.

pub mod platt;
pub mod search;
pub mod smo;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prosody::NucleusFeatures;
pub use platt::{platt_fit, PlattParams};
pub use search::{grid_search, GridPoint, GRID_C};
use smo::{KernelFn, LinearKernel, RbfKernel, SmoConfig};

pub const MODEL_FORMAT: &str = "stresskit-svm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("need at least 2 training instances, got {0}")]
    TooFewInstances(usize),
    #[error("non-finite feature in word {word_id}")]
    NonFinite { word_id: String },
    #[error("feature vectors have inconsistent dimensions")]
    Dimension,
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("SMO did not converge after {iterations} iterations (gap {gap})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("sigmoid fit did not converge (gradient norm {grad_norm})")]
    PlattNotConverged { grad_norm: f64 },
    #[error("word has no nuclei")]
    EmptyWord,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("model file: {0}")]
    Format(String),
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    /// Column standard deviations; 1.0 where a column is constant.
    pub sds: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let means: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let sds = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { means, sds }
    }

    pub fn identity(d: usize) -> Self {
        Scaler {
            means: vec![0.0; d],
            sds: vec![1.0; d],
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Rbf => "rbf",
            KernelKind::Linear => "linear",
        })
    }
}

impl FromStr for KernelKind {
    type Err = SvmError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rbf" => Ok(KernelKind::Rbf),
            "linear" => Ok(KernelKind::Linear),
            _ => Err(SvmError::BadParam(format!("unknown kernel {s:?}"))),
        }
    }
}

/// RBF width: a fixed value, or `1 / (d * variance)` of the training matrix
/// as seen by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gamma {
    Scale,
    Value(f64),
}

impl FromStr for Gamma {
    type Err = SvmError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "scale" {
            return Ok(Gamma::Scale);
        }
        match s.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Value(g)),
            _ => Err(SvmError::BadParam(format!("gamma must be \"scale\" or a positive number, got {s:?}"))),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Scale => f.write_str("scale"),
            Gamma::Value(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: Gamma,
    pub kernel: KernelKind,
    pub tol: f64,
    /// SMO budget in multiples of the training-set size.
    pub max_passes: usize,
    pub seed: u64,
    pub standardize: bool,
    pub platt: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 10.0,
            gamma: Gamma::Scale,
            kernel: KernelKind::Rbf,
            tol: 1e-3,
            max_passes: 10_000,
            seed: 0,
            standardize: true,
            platt: true,
        }
    }
}

/// One nucleus as a training example; label 1 marks the stressed nucleus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainInstance {
    pub word_id: String,
    pub nucleus_index: usize,
    pub label: u8,
    pub features: NucleusFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format: String,
    pub version: u32,
    pub kernel: KernelKind,
    pub gamma: f64,
    pub c: f64,
    pub bias: f64,
    pub scaler: Scaler,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub platt: Option<PlattParams>,
}

/// A trained model together with solver diagnostics.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: SvmModel,
    /// Dual variables of all training points, in input order.
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub gap: f64,
    pub objective: f64,
}

fn kernel_of(kind: KernelKind, gamma: f64) -> Box<dyn KernelFn> {
    match kind {
        KernelKind::Rbf => Box::new(RbfKernel { gamma }),
        KernelKind::Linear => Box::new(LinearKernel),
    }
}

/// Trains on raw feature rows with 0/1 labels.
pub fn fit(x: &[Vec<f64>], labels: &[u8], params: &SvmParams) -> Result<FitReport, SvmError> {
    if x.len() != labels.len() {
        return Err(SvmError::Dimension);
    }
    if x.len() < 2 {
        return Err(SvmError::TooFewInstances(x.len()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(SvmError::Dimension);
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(SvmError::SingleClass);
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(SvmError::BadParam(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(SvmError::BadParam(format!("tol must be positive, got {}", params.tol)));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SvmError::NonFinite {
            word_id: String::new(),
        });
    }

    let scaler = if params.standardize {
        Scaler::fit(x)
    } else {
        Scaler::identity(d)
    };
    let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let gamma = match params.gamma {
        Gamma::Value(g) => g,
        Gamma::Scale => scale_gamma(&z),
    };
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let kernel = kernel_of(params.kernel, gamma);
    let cfg = SmoConfig {
        c: params.c,
        tol: params.tol,
        max_iter: params.max_passes.saturating_mul(x.len()),
        seed: params.seed,
    };
    let sol = smo::solve(&z, &y, kernel.as_ref(), &cfg)?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(z[i].clone());
            dual_coefs.push(a * y[i]);
        }
    }
    let mut model = SvmModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        kernel: params.kernel,
        gamma,
        c: params.c,
        bias: sol.bias,
        scaler,
        support_vectors,
        dual_coefs,
        platt: None,
    };
    if params.platt {
        let dec: Vec<f64> = x.iter().map(|r| model.decision_value(r)).collect();
        match platt_fit(&dec, labels) {
            Ok(p) => model.platt = Some(p),
            Err(e) => log::warn!("probability calibration skipped: {e}"),
        }
    }
    Ok(FitReport {
        model,
        alpha: sol.alpha,
        iterations: sol.iterations,
        gap: sol.gap,
        objective: sol.objective,
    })
}

/// `1 / (d * var)` with `var` the variance of all entries of `z`.
fn scale_gamma(z: &[Vec<f64>]) -> f64 {
    let d = z[0].len().max(1);
    let all: Vec<f64> = z.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0 / d as f64
    }
}

/// Trains the nucleus classifier.
pub fn train_svm(data: &[TrainInstance], params: &SvmParams) -> Result<SvmModel, SvmError> {
    train_svm_report(data, params).map(|r| r.model)
}

pub fn train_svm_report(data: &[TrainInstance], params: &SvmParams) -> Result<FitReport, SvmError> {
    if let Some(bad) = data.iter().find(|t| !t.features.is_finite()) {
        return Err(SvmError::NonFinite {
            word_id: bad.word_id.clone(),
        });
    }
    let x: Vec<Vec<f64>> = data.iter().map(|t| t.features.to_array().to_vec()).collect();
    let y: Vec<u8> = data.iter().map(|t| t.label).collect();
    fit(&x, &y, params)
}

impl SvmModel {
    /// Raw decision value of an unscaled feature vector.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        let z = self.scaler.transform(x);
        let kernel = kernel_of(self.kernel, self.gamma);
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, c)| c * kernel.eval(&z, sv))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision(&self, f: &NucleusFeatures) -> f64 {
        self.decision_value(&f.to_array())
    }

    /// Platt probability of the positive class, when calibrated.
    pub fn probability(&self, f: &NucleusFeatures) -> Option<f64> {
        self.platt.map(|p| p.probability(self.decision(f)))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SvmError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| SvmError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| SvmError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SvmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SvmError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let model: SvmModel = serde_json::from_str(&text).map_err(|e| SvmError::Format(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(SvmError::Format(format!("unexpected format tag {:?}", model.format)));
        }
        if model.version != MODEL_VERSION {
            return Err(SvmError::Format(format!("unsupported version {}", model.version)));
        }
        if model.support_vectors.len() != model.dual_coefs.len() || model.support_vectors.is_empty() {
            return Err(SvmError::Format("support vectors and coefficients disagree".into()));
        }
        Ok(model)
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Picks the stressed nucleus of one word.
pub fn predict_word(model: &SvmModel, nuclei: &[NucleusFeatures]) -> Result<(usize, Vec<f64>), SvmError> {
    let scores: Vec<f64> = nuclei.iter().map(|f| model.decision(f)).collect();
    let idx = argmax(&scores).ok_or(SvmError::EmptyWord)?;
    Ok((idx, scores))
}

/// Groups consecutive instances by word, keeping first-appearance order.
pub fn group_by_word(data: &[TrainInstance]) -> Vec<(&str, Vec<&TrainInstance>)> {
    let mut out: Vec<(&str, Vec<&TrainInstance>)> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for t in data {
        let slot = *index.entry(t.word_id.as_str()).or_insert_with(|| {
            out.push((t.word_id.as_str(), Vec::new()));
            out.len() - 1
        });
        out[slot].1.push(t);
    }
    for (_, v) in &mut out {
        v.sort_by_key(|t| t.nucleus_index);
    }
    out
}
