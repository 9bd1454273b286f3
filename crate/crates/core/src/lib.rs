//! Primary stress detection for multi-syllabic spoken words.
//!
//! The pipeline reads TextGrid annotations into word manifests
//! ([`corpus`]), measures pitch, intensity and sonority prominence of each
//! syllable nucleus ([`prosody`]), classifies nuclei with an SVM and picks
//! one stressed nucleus per word ([`svm`]). [`framecodec`] converts stress
//! to and from 20 ms frame labels for frame-classification models, and
//! [`metrics`] scores predictions and annotations.

pub mod audio;
pub mod cli;
pub mod corpus;
pub mod curve;
pub mod dataset;
pub mod framecodec;
pub mod jsonl;
pub mod metrics;
pub mod prosody;
pub mod svm;
pub mod synth;
