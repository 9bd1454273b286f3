// Build a small annotation, write it as a TextGrid and read it back.
use stresskit::corpus::{build_manifest, parse_textgrid, serialize_textgrid, Interval, ManifestOptions, TextGridDoc, Tier};

fn main() {
    let iv = Interval::new;
    let mut doc = TextGridDoc::new(0.0, 0.8);
    doc.tiers.push(Tier::interval_tier(
        "words",
        0.0,
        0.8,
        vec![iv(0.0, 0.1, ""), iv(0.1, 0.7, "ljubav"), iv(0.7, 0.8, "")],
    ));
    doc.tiers.push(Tier::interval_tier(
        "nuclei",
        0.0,
        0.8,
        vec![iv(0.0, 0.2, ""), iv(0.2, 0.3, "u"), iv(0.3, 0.45, ""), iv(0.45, 0.6, "a"), iv(0.6, 0.8, "")],
    ));
    doc.tiers.push(Tier::interval_tier(
        "stress",
        0.0,
        0.8,
        vec![iv(0.0, 0.2, ""), iv(0.2, 0.3, "1"), iv(0.3, 0.8, "")],
    ));

    let text = serialize_textgrid(&doc).expect("valid document");
    println!("{text}");
    let back = parse_textgrid(&text).expect("own output parses");
    assert_eq!(back, doc);

    let out = build_manifest(&back, "ljubav.wav", &ManifestOptions::default()).unwrap();
    for r in &out.records {
        println!("{} {:?}: {} nuclei, stressed {:?}", r.word_id, r.text, r.nuclei.len(), r.stress_index);
    }
}
