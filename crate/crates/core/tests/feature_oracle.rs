mod common;

use stresskit::prosody::nucleus_features;

#[test]
fn features_match_direct_recomputation() {
    let mut rng = common::rng(11);
    let mut worst: f64 = 0.0;
    let mut neutral_seen = 0;
    for case in 0..100 {
        let c = common::random_feature_case(&mut rng);
        for (k, n) in c.nuclei.iter().enumerate() {
            let got = nucleus_features(&c.tracks, c.word, n).unwrap();
            let (want, flags) = common::oracle_features(&c.tracks, c.word, n);
            let f = got.flags;
            assert_eq!(
                [f.pitch_neutral, f.intensity_neutral, f.sonority_neutral],
                flags,
                "word {case} nucleus {k}"
            );
            neutral_seen += flags.iter().filter(|&&b| b).count();
            for (j, (g, w)) in got.features.to_array().iter().zip(want).enumerate() {
                let e = common::rel_err(*g, w);
                assert!(e < 1e-9, "word {case} nucleus {k} feature {j}: {g} vs {w}");
                worst = worst.max(e);
            }
        }
    }
    // the generator is meant to hit the neutral paths too
    assert!(neutral_seen > 0);
    eprintln!("largest relative error {worst:e}");
}

#[test]
fn nucleus_outside_word_is_refused() {
    let mut rng = common::rng(3);
    let c = common::random_feature_case(&mut rng);
    let mut n = c.nuclei[0].clone();
    n.t0 = c.word.0 - 0.5;
    assert!(nucleus_features(&c.tracks, c.word, &n).is_err());
    n.t0 = n.t1;
    assert!(nucleus_features(&c.tracks, c.word, &n).is_err());
}
