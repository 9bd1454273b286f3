//! Inter-annotator agreement on stressed-nucleus indices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_items: usize,
    pub observed_agreement: f64,
    /// `None` when every annotation carries the same value.
    pub alpha: Option<f64>,
}

/// Share of items annotated in both maps that received the same index.
pub fn observed_agreement(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> Result<f64, MetricsError> {
    let (mut common, mut same) = (0usize, 0usize);
    for (k, va) in a {
        if let Some(vb) = b.get(k) {
            common += 1;
            same += usize::from(va == vb);
        }
    }
    if common == 0 {
        return Err(MetricsError::NoCommonItems);
    }
    Ok(same as f64 / common as f64)
}

/// Nominal Krippendorff alpha from the coincidence matrix. Items with fewer
/// than two values do not contribute.
pub fn krippendorff_alpha(annotations: &BTreeMap<String, Vec<usize>>) -> Result<f64, MetricsError> {
    let paired: Vec<&Vec<usize>> = annotations.values().filter(|v| v.len() >= 2).collect();
    if annotations.len() < 2 || paired.is_empty() {
        return Err(MetricsError::TooFewPairs);
    }
    let values: Vec<usize> = paired
        .iter()
        .flat_map(|v| v.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |v: usize| values.binary_search(&v).expect("collected value");
    let q = values.len();
    let mut o = vec![vec![0.0f64; q]; q];
    for unit in &paired {
        let w = 1.0 / (unit.len() - 1) as f64;
        for (i, &a) in unit.iter().enumerate() {
            for (j, &b) in unit.iter().enumerate() {
                if i != j {
                    o[idx(a)][idx(b)] += w;
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let mut disagree = 0.0;
    let mut expected = 0.0;
    for c in 0..q {
        for k in 0..q {
            if c != k {
                disagree += o[c][k];
                expected += n_c[c] * n_c[k];
            }
        }
    }
    if expected == 0.0 {
        return Err(MetricsError::Undefined);
    }
    Ok(1.0 - (n - 1.0) * disagree / expected)
}

/// Agreement of two annotators over their common items.
pub fn agreement_report(
    a: &BTreeMap<String, usize>,
    b: &BTreeMap<String, usize>,
) -> Result<AgreementReport, MetricsError> {
    let observed = observed_agreement(a, b)?;
    let mut units: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (k, &v) in a.iter().chain(b) {
        units.entry(k.clone()).or_default().push(v);
    }
    let n_items = units.values().filter(|v| v.len() >= 2).count();
    let alpha = match krippendorff_alpha(&units) {
        Ok(x) => Some(x),
        Err(MetricsError::Undefined) | Err(MetricsError::TooFewPairs) => None,
        Err(e) => return Err(e),
    };
    Ok(AgreementReport {
        n_items,
        observed_agreement: observed,
        alpha,
    })
}
