//! Sigmoid calibration of decision values, `p = 1 / (1 + exp(A f + B))`.
//!
//! Newton's method with backtracking on the regularized cross-entropy, with
//! targets smoothed to `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`.

use serde::{Deserialize, Serialize};

use super::SvmError;

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
const EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl PlattParams {
    pub fn probability(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        if z >= 0.0 {
            (-z).exp() / (1.0 + (-z).exp())
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

/// `log(1 + exp(-z))` computed without overflow, plus `t` weighting.
fn loss(a: f64, b: f64, dec: &[f64], t: &[f64]) -> f64 {
    dec.iter()
        .zip(t)
        .map(|(&f, &ti)| {
            let z = a * f + b;
            if z >= 0.0 {
                ti * z + (1.0 + (-z).exp()).ln()
            } else {
                (ti - 1.0) * z + (1.0 + z.exp()).ln()
            }
        })
        .sum()
}

pub fn platt_fit(decisions: &[f64], labels: &[u8]) -> Result<PlattParams, SvmError> {
    if decisions.len() != labels.len() {
        return Err(SvmError::Dimension);
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(SvmError::SingleClass);
    }
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = loss(a, b, decisions, &t);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&f, &ti) in decisions.iter().zip(&t) {
            let z = a * f + b;
            let (p, q) = if z >= 0.0 {
                ((-z).exp() / (1.0 + (-z).exp()), 1.0 / (1.0 + (-z).exp()))
            } else {
                (1.0 / (1.0 + z.exp()), z.exp() / (1.0 + z.exp()))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        grad_norm = g1.hypot(g2);
        if g1.abs() < EPS && g2.abs() < EPS {
            return Ok(PlattParams { a, b });
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = loss(na, nb, decisions, &t);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
            if step < MIN_STEP {
                return Err(SvmError::PlattNotConverged { grad_norm });
            }
        }
    }
    Err(SvmError::PlattNotConverged { grad_norm })
}
