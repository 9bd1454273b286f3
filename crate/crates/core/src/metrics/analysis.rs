//! Lexical analyses of stress placement over word forms.
//!
//! Word identity is the lowercased orthographic form after digraph
//! normalization.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{word_form, WordRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressVariation {
    pub min_count: usize,
    pub eligible_words: usize,
    pub varying_words: usize,
    pub varying_fraction: f64,
    /// Forms seen with more than one stress position, sorted.
    pub words: Vec<String>,
}

fn positions_by_form(records: &[WordRecord]) -> BTreeMap<String, (usize, BTreeSet<usize>)> {
    let mut map: BTreeMap<String, (usize, BTreeSet<usize>)> = BTreeMap::new();
    for r in records {
        if let Some(s) = r.stress_index {
            let e = map.entry(word_form(&r.text)).or_default();
            e.0 += 1;
            e.1.insert(s);
        }
    }
    map
}

/// Among forms occurring at least `min_count` times, the share stressed in
/// more than one position.
pub fn stress_variation(records: &[WordRecord], min_count: usize) -> StressVariation {
    let forms = positions_by_form(records);
    let eligible: Vec<(&String, &BTreeSet<usize>)> = forms
        .iter()
        .filter(|(_, (n, _))| *n >= min_count)
        .map(|(w, (_, s))| (w, s))
        .collect();
    let words: Vec<String> = eligible
        .iter()
        .filter(|(_, s)| s.len() > 1)
        .map(|(w, _)| (*w).clone())
        .collect();
    let eligible_words = eligible.len();
    StressVariation {
        min_count,
        eligible_words,
        varying_words: words.len(),
        varying_fraction: if eligible_words > 0 {
            words.len() as f64 / eligible_words as f64
        } else {
            0.0
        },
        words,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub test_forms: usize,
    pub overlap_words: usize,
    /// `overlap_words / test_forms`.
    pub overlap_fraction: f64,
    pub unseen_stress_words: usize,
    /// `unseen_stress_words / overlap_words`.
    pub unseen_fraction: f64,
    pub unseen: Vec<String>,
}

/// Test forms also present in train, and how many of them appear in test
/// with a stress position never seen for that form in train.
pub fn crosslingual_overlap(train: &[WordRecord], test: &[WordRecord]) -> Overlap {
    let tr = positions_by_form(train);
    let te = positions_by_form(test);
    let mut overlap_words = 0;
    let mut unseen = Vec::new();
    for (form, (_, test_pos)) in &te {
        if let Some((_, train_pos)) = tr.get(form) {
            overlap_words += 1;
            if !test_pos.is_subset(train_pos) {
                unseen.push(form.clone());
            }
        }
    }
    let frac = |a: usize, b: usize| if b > 0 { a as f64 / b as f64 } else { 0.0 };
    Overlap {
        test_forms: te.len(),
        overlap_words,
        overlap_fraction: frac(overlap_words, te.len()),
        unseen_stress_words: unseen.len(),
        unseen_fraction: frac(unseen.len(), overlap_words),
        unseen,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Gender, NucleusSpan};

    fn rec(text: &str, stress: usize) -> WordRecord {
        WordRecord {
            word_id: format!("{text}-{stress}"),
            text: text.into(),
            audio_path: String::new(),
            t0: 0.0,
            t1: 1.0,
            nuclei: (0..4)
                .map(|k| NucleusSpan {
                    t0: k as f64 * 0.25,
                    t1: k as f64 * 0.25 + 0.1,
                    syllable_index: k,
                })
                .collect(),
            stress_index: Some(stress),
            speaker_id: "s".into(),
            gender: Gender::Unknown,
            dataset: String::new(),
        }
    }

    #[test]
    fn singletons_are_not_eligible() {
        let recs: Vec<_> = ["a", "b", "c"].iter().map(|w| rec(w, 0)).collect();
        let v = stress_variation(&recs, 5);
        assert_eq!((v.eligible_words, v.varying_fraction), (0, 0.0));
    }

    #[test]
    fn one_in_ten_varies() {
        let mut recs = Vec::new();
        for w in 0..10 {
            for k in 0..5 {
                let s = if w == 3 && k == 4 { 1 } else { 0 };
                recs.push(rec(&format!("word{w}"), s));
            }
        }
        let v = stress_variation(&recs, 5);
        assert_eq!(v.eligible_words, 10);
        assert!((v.varying_fraction - 0.1).abs() < 1e-15);
        assert_eq!(v.words, vec!["word3".to_string()]);
        recs.reverse();
        assert_eq!(stress_variation(&recs, 5), v);
    }

    #[test]
    fn forms_are_case_and_digraph_folded() {
        let recs = vec![rec("Ljubav", 0), rec("ljubav", 1), rec("ǉubav", 0)];
        let v = stress_variation(&recs, 3);
        assert_eq!(v.eligible_words, 1);
        assert_eq!(v.varying_words, 1);
    }

    #[test]
    fn disjoint_vocabularies() {
        let o = crosslingual_overlap(&[rec("a", 0)], &[rec("b", 0)]);
        assert_eq!((o.overlap_words, o.overlap_fraction, o.unseen_stress_words, o.unseen_fraction), (0, 0.0, 0, 0.0));
    }

    #[test]
    fn four_shared_one_divergent() {
        let train: Vec<_> = ["a", "b", "c", "d", "x"].iter().map(|w| rec(w, 0)).collect();
        let mut test: Vec<_> = ["a", "b", "c", "y", "z", "q"].iter().map(|w| rec(w, 0)).collect();
        test.push(rec("d", 2));
        let o = crosslingual_overlap(&train, &test);
        assert_eq!(o.test_forms, 7);
        assert_eq!(o.overlap_words, 4);
        assert!((o.overlap_fraction - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(o.unseen_stress_words, 1);
        assert_eq!(o.unseen_fraction, 0.25);
        assert_eq!(o.unseen, vec!["d".to_string()]);
    }
}
