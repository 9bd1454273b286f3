//! Annotated speech corpora: TextGrid I/O, word manifests and splits.

pub mod digraphs;
pub mod manifest;
pub mod split;
pub mod textgrid;

pub use digraphs::{normalize_digraphs, word_form};
pub use manifest::{
    build_manifest, records_to_textgrid, Gender, ManifestError, ManifestOptions, ManifestOutput, NucleusSpan, Reject,
    WordRecord,
};
pub use split::{split_speakers, SplitError};
pub use textgrid::{
    parse_textgrid, read_textgrid, serialize_textgrid, write_textgrid, Interval, Point, TextGridDoc, TextGridError,
    Tier, TierKind,
};
