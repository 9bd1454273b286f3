//! Word/nucleus manifests built from annotated TextGrids.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::textgrid::{Interval, TextGridDoc, Tier, TierKind, TIME_EPS};

#[derive(Debug, Error, PartialEq)]
pub enum ManifestError {
    #[error("tier {0:?} not found")]
    MissingTier(String),
    #[error("tier {0:?} must be an interval tier")]
    NotIntervalTier(String),
    #[error("invalid record {word_id}: {reason}")]
    InvalidRecord { word_id: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum Gender {
    F,
    M,
    #[default]
    #[serde(rename = "unknown")]
    Unknown,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::F => "F",
            Gender::M => "M",
            Gender::Unknown => "unknown",
        })
    }
}

impl std::str::FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "F" | "f" => Ok(Gender::F),
            "M" | "m" => Ok(Gender::M),
            "unknown" | "U" | "u" | "" => Ok(Gender::Unknown),
            other => Err(format!("unknown gender {other:?} (expected F, M or unknown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleusSpan {
    pub t0: f64,
    pub t1: f64,
    pub syllable_index: usize,
}

impl NucleusSpan {
    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t0 + self.t1)
    }

    /// Half-open membership, the rule shared by feature extraction and the
    /// frame codec.
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t < self.t1
    }
}

/// One multi-syllabic word with its candidate nuclei.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordRecord {
    pub word_id: String,
    pub text: String,
    pub audio_path: String,
    pub t0: f64,
    pub t1: f64,
    pub nuclei: Vec<NucleusSpan>,
    pub stress_index: Option<usize>,
    pub speaker_id: String,
    pub gender: Gender,
    pub dataset: String,
}

impl WordRecord {
    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn stressed_nucleus(&self) -> Option<&NucleusSpan> {
        self.stress_index.and_then(|i| self.nuclei.get(i))
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let bad = |reason: String| ManifestError::InvalidRecord {
            word_id: self.word_id.clone(),
            reason,
        };
        if !(self.t0.is_finite() && self.t1.is_finite()) || self.t0 >= self.t1 {
            return Err(bad(format!("word interval [{}, {}] is empty", self.t0, self.t1)));
        }
        if self.nuclei.len() < 2 {
            return Err(bad(format!("{} nuclei; multi-syllabic words need at least 2", self.nuclei.len())));
        }
        let mut prev_end = f64::NEG_INFINITY;
        for (i, n) in self.nuclei.iter().enumerate() {
            if n.syllable_index != i {
                return Err(bad(format!("nucleus {i} carries syllable_index {}", n.syllable_index)));
            }
            if n.t0 >= n.t1 {
                return Err(bad(format!("nucleus {i} is empty")));
            }
            if n.t0 < self.t0 - TIME_EPS || n.t1 > self.t1 + TIME_EPS {
                return Err(bad(format!("nucleus {i} lies outside the word")));
            }
            if n.t0 < prev_end - TIME_EPS {
                return Err(bad(format!("nucleus {i} overlaps or precedes nucleus {}", i.saturating_sub(1))));
            }
            prev_end = n.t1;
        }
        if let Some(s) = self.stress_index {
            if s >= self.nuclei.len() {
                return Err(bad(format!("stress_index {s} out of range")));
            }
        }
        Ok(())
    }
}

/// A word left out of the manifest, with the reason why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    pub word_id: String,
    pub text: String,
    pub audio_path: String,
    pub t0: f64,
    pub t1: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ManifestOptions {
    pub word_tier: String,
    pub nucleus_tier: String,
    pub stress_tier: Option<String>,
    /// Any of these characters in a nucleus or stress label rejects the word.
    pub error_symbols: Vec<char>,
    pub speaker_id: String,
    pub gender: Gender,
    pub dataset: String,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        ManifestOptions {
            word_tier: "words".into(),
            nucleus_tier: "nuclei".into(),
            stress_tier: Some("stress".into()),
            error_symbols: vec!['?', '!'],
            speaker_id: String::new(),
            gender: Gender::Unknown,
            dataset: String::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ManifestOutput {
    pub records: Vec<WordRecord>,
    pub rejects: Vec<Reject>,
}

fn interval_tier<'a>(doc: &'a TextGridDoc, name: &str) -> Result<&'a Tier, ManifestError> {
    let tier = doc.tier(name).ok_or_else(|| ManifestError::MissingTier(name.to_string()))?;
    if tier.kind != TierKind::Interval {
        return Err(ManifestError::NotIntervalTier(name.to_string()));
    }
    Ok(tier)
}

fn labelled(tier: &Tier) -> impl Iterator<Item = &Interval> {
    tier.intervals.iter().filter(|iv| !iv.text.trim().is_empty())
}

fn stem_of(audio_path: &str) -> String {
    Path::new(audio_path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| audio_path.to_string())
}

/// Extracts one record per labelled word interval holding two or more
/// nucleus intervals.
///
/// Nuclei belong to a word when they nest inside it. The stress tier may be
/// an interval tier (a labelled interval whose span covers the nucleus
/// midpoint marks it) or a point tier (a point inside the nucleus marks it).
/// Words with a stress mark on zero or several nuclei, or whose nucleus or
/// stress labels carry an error symbol, go to the rejects list.
pub fn build_manifest(doc: &TextGridDoc, audio_path: &str, opts: &ManifestOptions) -> Result<ManifestOutput, ManifestError> {
    let words = interval_tier(doc, &opts.word_tier)?;
    let nuclei_tier = interval_tier(doc, &opts.nucleus_tier)?;
    let stress_tier = match &opts.stress_tier {
        Some(name) => Some(doc.tier(name).ok_or_else(|| ManifestError::MissingTier(name.clone()))?),
        None => None,
    };

    let prefix = if opts.dataset.is_empty() {
        stem_of(audio_path)
    } else {
        format!("{}/{}", opts.dataset, stem_of(audio_path))
    };
    let has_error_symbol = |s: &str| s.chars().any(|c| opts.error_symbols.contains(&c));

    let mut out = ManifestOutput::default();
    for (word_no, word) in labelled(words).enumerate() {
        let word_id = format!("{prefix}#{word_no:04}");
        let reject = |reason: String| Reject {
            word_id: word_id.clone(),
            text: word.text.clone(),
            audio_path: audio_path.to_string(),
            t0: word.xmin,
            t1: word.xmax,
            reason,
        };

        let inside: Vec<&Interval> = labelled(nuclei_tier)
            .filter(|n| n.xmin >= word.xmin - TIME_EPS && n.xmax <= word.xmax + TIME_EPS)
            .collect();
        let straddling = labelled(nuclei_tier).any(|n| {
            n.xmin < word.xmax - TIME_EPS
                && n.xmax > word.xmin + TIME_EPS
                && !(n.xmin >= word.xmin - TIME_EPS && n.xmax <= word.xmax + TIME_EPS)
        });
        if straddling {
            out.rejects.push(reject("nucleus interval crosses the word boundary".into()));
            continue;
        }
        if inside.len() < 2 {
            continue;
        }
        if inside.iter().any(|n| has_error_symbol(&n.text)) {
            out.rejects.push(reject("annotator error symbol on a nucleus".into()));
            continue;
        }

        let stress_index = match stress_tier {
            None => None,
            Some(tier) => {
                let mut marked = BTreeSet::new();
                let mut flagged = false;
                match tier.kind {
                    TierKind::Interval => {
                        for mark in labelled(tier) {
                            for (i, n) in inside.iter().enumerate() {
                                let m = n.midpoint();
                                if m >= mark.xmin && m < mark.xmax {
                                    marked.insert(i);
                                    flagged |= has_error_symbol(&mark.text);
                                }
                            }
                        }
                    }
                    TierKind::Point => {
                        for p in tier.points.iter().filter(|p| !p.text.trim().is_empty()) {
                            for (i, n) in inside.iter().enumerate() {
                                if p.time >= n.xmin && p.time < n.xmax {
                                    marked.insert(i);
                                    flagged |= has_error_symbol(&p.text);
                                }
                            }
                        }
                    }
                }
                if flagged {
                    out.rejects.push(reject("annotator error symbol on the stress mark".into()));
                    continue;
                }
                match marked.len() {
                    1 => marked.into_iter().next(),
                    0 => {
                        out.rejects.push(reject("no nucleus marked as stressed".into()));
                        continue;
                    }
                    k => {
                        out.rejects.push(reject(format!("{k} nuclei marked as stressed")));
                        continue;
                    }
                }
            }
        };

        let record = WordRecord {
            word_id: word_id.clone(),
            text: word.text.trim().to_string(),
            audio_path: audio_path.to_string(),
            t0: word.xmin,
            t1: word.xmax,
            nuclei: inside
                .iter()
                .enumerate()
                .map(|(i, n)| NucleusSpan {
                    t0: n.xmin,
                    t1: n.xmax,
                    syllable_index: i,
                })
                .collect(),
            stress_index,
            speaker_id: opts.speaker_id.clone(),
            gender: opts.gender,
            dataset: opts.dataset.clone(),
        };
        if let Err(e) = record.validate() {
            out.rejects.push(reject(e.to_string()));
            continue;
        }
        out.records.push(record);
    }
    Ok(out)
}

/// Lays out a TextGrid with word, nucleus and stress tiers for a set of
/// records sharing one recording. Useful for fixtures and synthetic data.
pub fn records_to_textgrid(records: &[WordRecord], xmax: f64, opts: &ManifestOptions) -> TextGridDoc {
    let fill = |spans: Vec<(f64, f64, String)>| -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for (a, b, text) in spans {
            if a > cursor + TIME_EPS {
                out.push(Interval::new(cursor, a, ""));
            }
            out.push(Interval::new(a, b, text));
            cursor = b;
        }
        if xmax > cursor + TIME_EPS {
            out.push(Interval::new(cursor, xmax, ""));
        }
        out
    };
    let words = fill(records.iter().map(|r| (r.t0, r.t1, r.text.clone())).collect());
    let nuclei = fill(
        records
            .iter()
            .flat_map(|r| r.nuclei.iter().map(|n| (n.t0, n.t1, "V".to_string())))
            .collect(),
    );
    let stress = fill(
        records
            .iter()
            .filter_map(|r| r.stressed_nucleus().map(|n| (n.t0, n.t1, "1".to_string())))
            .collect(),
    );
    let mut doc = TextGridDoc::new(0.0, xmax);
    doc.tiers.push(Tier::interval_tier(opts.word_tier.clone(), 0.0, xmax, words));
    doc.tiers.push(Tier::interval_tier(opts.nucleus_tier.clone(), 0.0, xmax, nuclei));
    if let Some(name) = &opts.stress_tier {
        doc.tiers.push(Tier::interval_tier(name.clone(), 0.0, xmax, stress));
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::textgrid::Point;

    fn grid(words: &[(f64, f64, &str)], nuclei: &[(f64, f64, &str)], stress: &[(f64, f64, &str)]) -> TextGridDoc {
        let mk = |v: &[(f64, f64, &str)]| v.iter().map(|&(a, b, t)| Interval::new(a, b, t)).collect();
        let mut doc = TextGridDoc::new(0.0, 10.0);
        doc.tiers.push(Tier::interval_tier("words", 0.0, 10.0, mk(words)));
        doc.tiers.push(Tier::interval_tier("nuclei", 0.0, 10.0, mk(nuclei)));
        doc.tiers.push(Tier::interval_tier("stress", 0.0, 10.0, mk(stress)));
        doc
    }

    #[test]
    fn stress_on_second_nucleus() {
        let doc = grid(&[(0.0, 1.0, "kuća")], &[(0.1, 0.2, "u"), (0.5, 0.6, "a")], &[(0.5, 0.6, "1")]);
        let out = build_manifest(&doc, "rec/a.wav", &ManifestOptions::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].stress_index, Some(1));
        assert_eq!(out.records[0].word_id, "a#0000");
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn monosyllable_is_skipped() {
        let doc = grid(&[(0.0, 1.0, "pas")], &[(0.3, 0.4, "a")], &[(0.3, 0.4, "1")]);
        let out = build_manifest(&doc, "a.wav", &ManifestOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn double_stress_is_rejected() {
        let doc = grid(&[(0.0, 1.0, "kuća")], &[(0.1, 0.2, "u"), (0.5, 0.6, "a")], &[(0.1, 0.6, "1")]);
        let out = build_manifest(&doc, "a.wav", &ManifestOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.rejects[0].reason, "2 nuclei marked as stressed");
    }

    #[test]
    fn five_words_one_error_symbol() {
        let mut words = Vec::new();
        let mut nuclei = Vec::new();
        let mut stress = Vec::new();
        for w in 0..5 {
            let t = w as f64;
            words.push((t, t + 0.9, "riječ"));
            let label = if w == 2 { "e?" } else { "e" };
            nuclei.push((t + 0.1, t + 0.2, "i"));
            nuclei.push((t + 0.5, t + 0.6, label));
            stress.push((t + 0.1, t + 0.2, "1"));
        }
        let doc = grid(&words, &nuclei, &stress);
        let out = build_manifest(&doc, "a.wav", &ManifestOptions::default()).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].word_id, "a#0002");
        for r in &out.records {
            r.validate().unwrap();
        }
    }

    #[test]
    fn point_stress_tier() {
        let mut doc = grid(&[(0.0, 1.0, "voda")], &[(0.1, 0.2, "o"), (0.5, 0.6, "a")], &[]);
        doc.tiers[2] = Tier::point_tier(
            "stress",
            0.0,
            10.0,
            vec![Point {
                time: 0.15,
                text: "x".into(),
            }],
        );
        let out = build_manifest(&doc, "a.wav", &ManifestOptions::default()).unwrap();
        assert_eq!(out.records[0].stress_index, Some(0));
    }

    #[test]
    fn missing_tier_is_named() {
        let doc = grid(&[], &[], &[]);
        let opts = ManifestOptions {
            nucleus_tier: "syllables".into(),
            ..Default::default()
        };
        assert_eq!(
            build_manifest(&doc, "a.wav", &opts).unwrap_err(),
            ManifestError::MissingTier("syllables".into())
        );
    }

    #[test]
    fn unannotated_without_stress_tier() {
        let doc = grid(&[(0.0, 1.0, "kuća")], &[(0.1, 0.2, "u"), (0.5, 0.6, "a")], &[]);
        let opts = ManifestOptions {
            stress_tier: None,
            ..Default::default()
        };
        let out = build_manifest(&doc, "a.wav", &opts).unwrap();
        assert_eq!(out.records[0].stress_index, None);
    }

    #[test]
    fn textgrid_layout_round_trips_through_builder() {
        let doc = grid(&[(0.0, 1.0, "kuća")], &[(0.1, 0.2, "u"), (0.5, 0.6, "a")], &[(0.5, 0.6, "1")]);
        let opts = ManifestOptions::default();
        let out = build_manifest(&doc, "a.wav", &opts).unwrap();
        let regrid = records_to_textgrid(&out.records, 10.0, &opts);
        let again = build_manifest(&regrid, "a.wav", &opts).unwrap();
        assert_eq!(again.records, out.records);
    }

    #[test]
    fn gender_serializes_as_documented() {
        assert_eq!(serde_json::to_string(&Gender::Unknown).unwrap(), "\"unknown\"");
        assert_eq!(serde_json::to_string(&Gender::F).unwrap(), "\"F\"");
    }
}
