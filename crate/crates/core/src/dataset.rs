//! Corpus-level pipeline steps: nucleus feature tables and word predictions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{self, AudioClip};
use crate::corpus::WordRecord;
use crate::framecodec::PredictionRecord;
use crate::prosody::{word_features, NucleusFeatures, QualityFlags};
use crate::svm::{predict_word, SvmError, SvmModel, TrainInstance};

/// One line of a feature table: a nucleus with its ten features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub word_id: String,
    pub nucleus_index: usize,
    pub n_nuclei: usize,
    /// 1 for the stressed nucleus, 0 otherwise; absent without annotation.
    pub label: Option<u8>,
    pub speaker_id: String,
    pub dataset: String,
    pub features: NucleusFeatures,
    pub flags: QualityFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub word_id: String,
    pub reason: String,
}

fn rows_for_word(clip: &AudioClip, word: &WordRecord) -> Result<Vec<FeatureRow>, Skipped> {
    let ms = word_features(clip, word).map_err(|e| Skipped {
        word_id: word.word_id.clone(),
        reason: e.to_string(),
    })?;
    Ok(ms
        .into_iter()
        .enumerate()
        .map(|(k, m)| FeatureRow {
            word_id: word.word_id.clone(),
            nucleus_index: k,
            n_nuclei: word.nuclei.len(),
            label: word.stress_index.map(|s| u8::from(s == k)),
            speaker_id: word.speaker_id.clone(),
            dataset: word.dataset.clone(),
            features: m.features,
            flags: m.flags,
        })
        .collect())
}

/// Features for words that all live in `clip`.
pub fn features_for_clip(clip: &AudioClip, words: &[WordRecord]) -> (Vec<FeatureRow>, Vec<Skipped>) {
    let results: Vec<_> = words.par_iter().map(|w| rows_for_word(clip, w)).collect();
    collect_sorted(results)
}

fn collect_sorted(results: Vec<Result<Vec<FeatureRow>, Skipped>>) -> (Vec<FeatureRow>, Vec<Skipped>) {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(v) => rows.extend(v),
            Err(s) => skipped.push(s),
        }
    }
    rows.sort_by(|a, b| a.word_id.cmp(&b.word_id).then(a.nucleus_index.cmp(&b.nucleus_index)));
    skipped.sort_by(|a, b| a.word_id.cmp(&b.word_id));
    (rows, skipped)
}

pub fn resolve_audio(root: &Path, audio_path: &str) -> PathBuf {
    let p = Path::new(audio_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// Loads every recording once and measures all of its words, in parallel
/// across recordings. Words whose audio cannot be read are skipped.
/// Rows come back sorted by word id and nucleus index.
pub fn extract_features(records: &[WordRecord], audio_root: &Path) -> (Vec<FeatureRow>, Vec<Skipped>) {
    let mut by_file: BTreeMap<&str, Vec<&WordRecord>> = BTreeMap::new();
    for r in records {
        by_file.entry(r.audio_path.as_str()).or_default().push(r);
    }
    let groups: Vec<(&str, Vec<&WordRecord>)> = by_file.into_iter().collect();
    let results: Vec<Result<Vec<FeatureRow>, Skipped>> = groups
        .par_iter()
        .flat_map_iter(|(path, words)| {
            let clip = audio::load_canonical(resolve_audio(audio_root, path));
            words
                .iter()
                .map(|w| match &clip {
                    Ok(c) => rows_for_word(c, w),
                    Err(e) => Err(Skipped {
                        word_id: w.word_id.clone(),
                        reason: e.to_string(),
                    }),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    collect_sorted(results)
}

/// Labelled rows as training instances; unlabelled rows are dropped.
pub fn to_instances(rows: &[FeatureRow]) -> Vec<TrainInstance> {
    rows.iter()
        .filter_map(|r| {
            r.label.map(|label| TrainInstance {
                word_id: r.word_id.clone(),
                nucleus_index: r.nucleus_index,
                label,
                features: r.features,
            })
        })
        .collect()
}

/// Rows grouped per word in word-id order, nuclei sorted.
pub fn group_rows(rows: &[FeatureRow]) -> Vec<(String, Vec<&FeatureRow>)> {
    let mut map: BTreeMap<&str, Vec<&FeatureRow>> = BTreeMap::new();
    for r in rows {
        map.entry(&r.word_id).or_default().push(r);
    }
    map.into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|r| r.nucleus_index);
            (k.to_string(), v)
        })
        .collect()
}

/// Word-level predictions, sorted by word id. The score is the winning
/// nucleus's decision value.
pub fn predict_rows(model: &SvmModel, rows: &[FeatureRow]) -> Result<Vec<PredictionRecord>, SvmError> {
    let words = group_rows(rows);
    words
        .par_iter()
        .map(|(id, nuclei)| {
            let feats: Vec<NucleusFeatures> = nuclei.iter().map(|r| r.features).collect();
            let (idx, scores) = predict_word(model, &feats)?;
            let gold = nuclei.iter().position(|r| r.label == Some(1));
            Ok(PredictionRecord {
                word_id: id.clone(),
                predicted_index: idx,
                gold_index: gold,
                n_nuclei: nuclei.len(),
                score: scores[idx],
            })
        })
        .collect()
}
