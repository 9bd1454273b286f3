mod common;

use proptest::prelude::*;
use rand::Rng;
use stresskit::framecodec::{
    decode_logits, encode_labels, frame_count, one_hot, read_logits, roundtrip_check, write_logits, FrameLogitSeq,
    HOP_MS,
};

#[test]
fn encode_marks_exactly_the_midpoint_frames() {
    let mut rng = common::rng(1);
    for id in 0..1000 {
        let resolvable = rng.random_bool(0.8);
        let w = common::random_word(&mut rng, id, resolvable);
        let enc = encode_labels(&w).unwrap();
        let n = enc.seq.labels.len();
        assert_eq!(n, ((w.t1 - w.t0) / 0.02 - 1e-6).ceil().max(1.0) as usize);
        let s = w.stressed_nucleus().unwrap();
        let want = common::frames_with_midpoint_in(w.t0, n, s.t0, s.t1);
        let got: Vec<usize> = (0..n).filter(|&i| enc.seq.labels[i] == 1).collect();
        assert_eq!(got, want, "{}", w.word_id);
        assert_eq!(enc.empty_nucleus, want.is_empty());
    }
}

#[test]
fn decode_of_encode_recovers_the_stress_index() {
    let mut rng = common::rng(2);
    for id in 0..1000 {
        let w = common::random_word(&mut rng, id, true);
        let enc = encode_labels(&w).unwrap();
        let pred = decode_logits(&one_hot(&enc.seq), &w).unwrap();
        assert_eq!(Some(pred.predicted_index), w.stress_index, "{}", w.word_id);
        assert!(roundtrip_check(&w));
    }
}

#[test]
fn decode_is_total_on_finite_logits() {
    let mut rng = common::rng(3);
    let mut failures = 0;
    for id in 0..10_000 {
        let resolvable = rng.random_bool(0.5);
        let w = common::random_word(&mut rng, id, resolvable);
        let n = frame_count(w.t1 - w.t0, HOP_MS);
        let len = (n as i64 + rng.random_range(-1..=1)).max(1) as usize;
        let scale = [1e-3, 1.0, 1e3][rng.random_range(0..3)];
        let logits = (0..len)
            .map(|_| [rng.random_range(-1.0..1.0) * scale, rng.random_range(-1.0..1.0) * scale])
            .collect();
        let seq = FrameLogitSeq {
            word_id: w.word_id.clone(),
            hop_ms: HOP_MS,
            logits,
        };
        match decode_logits(&seq, &w) {
            Ok(p) if p.predicted_index < w.nuclei.len() && p.score.is_finite() => {}
            _ => failures += 1,
        }
    }
    assert_eq!(failures, 0);
}

#[test]
fn lengths_beyond_one_frame_are_refused() {
    let mut rng = common::rng(4);
    let w = common::random_word(&mut rng, 0, true);
    let n = frame_count(w.t1 - w.t0, HOP_MS);
    for len in [n + 2, n.saturating_sub(2).max(1)] {
        if len.abs_diff(n) <= 1 {
            continue;
        }
        let seq = FrameLogitSeq {
            word_id: w.word_id.clone(),
            hop_ms: HOP_MS,
            logits: vec![[0.0, 1.0]; len],
        };
        assert!(decode_logits(&seq, &w).is_err());
    }
}

#[test]
fn logit_jsonl_interface() {
    // One JSON object per line: word_id, hop_ms and [neg, pos] pairs.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("logits.jsonl");
    std::fs::write(
        &path,
        "{\"word_id\":\"w1\",\"hop_ms\":20,\"logits\":[[0.5,-0.5],[-1.0,2.0],[-1.0,2.5],[0.3,0.1]]}\n\
         {\"word_id\":\"w2\",\"hop_ms\":20,\"logits\":[[1.0,0.0]]}\n",
    )
    .unwrap();
    let seqs = read_logits(&path).unwrap();
    assert_eq!(seqs.len(), 2);
    assert_eq!(seqs[0].logits[2], [-1.0, 2.5]);

    let out = dir.path().join("again.jsonl");
    write_logits(&out, &seqs).unwrap();
    assert_eq!(read_logits(&out).unwrap(), seqs);
    let text = std::fs::read_to_string(&out).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["hop_ms"], 20);
    assert_eq!(first["logits"][1][1], 2.0);

    std::fs::write(&path, "{\"word_id\":\"w1\",\"hop_ms\":20}\n").unwrap();
    assert!(read_logits(&path).is_err());
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-1024i32..1024).prop_map(|k| k as f64 / 64.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn decode_ignores_a_constant_shift(
        seed in any::<u64>(),
        pairs in prop::collection::vec((dyadic(), dyadic()), 1..40),
        shift in dyadic(),
    ) {
        let mut rng = common::rng(seed);
        let w = common::random_word(&mut rng, 0, true);
        let n = frame_count(w.t1 - w.t0, HOP_MS);
        let logits: Vec<[f64; 2]> = (0..n).map(|i| { let (a, b) = pairs[i % pairs.len()]; [a, b] }).collect();
        let moved: Vec<[f64; 2]> = logits.iter().map(|[a, b]| [a + shift, b + shift]).collect();
        let mk = |l: Vec<[f64; 2]>| FrameLogitSeq { word_id: w.word_id.clone(), hop_ms: HOP_MS, logits: l };
        let p = decode_logits(&mk(logits), &w).unwrap();
        let q = decode_logits(&mk(moved), &w).unwrap();
        prop_assert_eq!(p.predicted_index, q.predicted_index);
        prop_assert_eq!(p.score, q.score);
    }

    #[test]
    fn encoded_labels_hold_at_most_one_run(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let w = common::random_word(&mut rng, 0, false);
        let labels = encode_labels(&w).unwrap().seq.labels;
        let starts = labels.windows(2).filter(|p| p == &[0, 1]).count() + usize::from(labels[0] == 1);
        prop_assert!(starts <= 1);
        prop_assert_eq!(labels.len(), frame_count(w.t1 - w.t0, HOP_MS));
    }
}
