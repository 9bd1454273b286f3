//! Gold vs. predicted stress position, with 1-based syllable positions.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::framecodec::PredictionRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub max_position: usize,
    /// `counts[g][p]`: gold position `g + 1`, predicted position `p + 1`.
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion_matrix(preds: &[PredictionRecord]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut pairs = Vec::with_capacity(preds.len());
    for p in preds {
        let g = p.gold_index.ok_or_else(|| MetricsError::MissingGold(p.word_id.clone()))?;
        pairs.push((g, p.predicted_index));
    }
    let max_position = pairs.iter().map(|&(g, p)| g.max(p) + 1).max().unwrap_or(1);
    let mut counts = vec![vec![0u64; max_position]; max_position];
    for (g, p) in pairs {
        counts[g][p] += 1;
    }
    Ok(ConfusionMatrix { max_position, counts })
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn diagonal(&self) -> u64 {
        (0..self.max_position).map(|i| self.counts[i][i]).sum()
    }

    pub fn gold_histogram(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Each row as percentages of its gold count (zeros for empty rows).
    pub fn row_percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let s: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if s > 0 { 100.0 * c as f64 / s as f64 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Long-format CSV: `gold,predicted,count,row_pct`.
    pub fn to_csv(&self) -> String {
        let pct = self.row_percentages();
        let mut out = String::from("gold,predicted,count,row_pct\n");
        for g in 0..self.max_position {
            for p in 0..self.max_position {
                writeln!(out, "{},{},{},{:.4}", g + 1, p + 1, self.counts[g][p], pct[g][p]).unwrap();
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let pct = self.row_percentages();
        let mut out = String::from("gold\\pred");
        for p in 1..=self.max_position {
            write!(out, " {p:>14}").unwrap();
        }
        out.push('\n');
        for g in 0..self.max_position {
            write!(out, "{:<9}", g + 1).unwrap();
            for p in 0..self.max_position {
                write!(out, " {:>6} ({:>5.1}%)", self.counts[g][p], pct[g][p]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::word_accuracy;

    fn pred(p: usize, g: usize) -> PredictionRecord {
        PredictionRecord {
            word_id: String::new(),
            predicted_index: p,
            gold_index: Some(g),
            n_nuclei: 4,
            score: 0.0,
        }
    }

    #[test]
    fn perfect_is_diagonal() {
        let m = confusion_matrix(&[pred(0, 0), pred(1, 1), pred(2, 2), pred(0, 0)]).unwrap();
        assert_eq!(m.max_position, 3);
        assert_eq!(m.counts, vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn rows_and_diagonal() {
        let preds = [pred(0, 0), pred(1, 0), pred(0, 1), pred(3, 1), pred(1, 1)];
        let m = confusion_matrix(&preds).unwrap();
        assert_eq!(m.gold_histogram(), vec![2, 3, 0, 0]);
        assert_eq!(m.total(), 5);
        assert_eq!(m.diagonal() as f64 / m.total() as f64, word_accuracy(&preds).unwrap());
        assert_eq!(m.row_percentages()[0], vec![50.0, 50.0, 0.0, 0.0]);
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.contains("\n2,4,1,33.3333\n"));
    }
}
