//! Prosodic contours and nucleus prominence features.

pub mod contours;
pub mod features;

pub use contours::{
    contour_rows, intensity_contour, pitch_contour, sonority_contour, ContourRow, ProsodyTracks, Track, TrackFrame,
};
pub use features::{
    nucleus_features, word_features, FeatureError, NucleusFeatures, NucleusMeasurement, QualityFlags, FEATURE_NAMES,
    N_FEATURES, WORD_PADDING_S,
};
