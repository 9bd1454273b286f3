// Word accuracy with a bootstrap interval, and the confusion matrix of
// syllable positions.
use rand::{Rng, SeedableRng};
use stresskit::framecodec::PredictionRecord;
use stresskit::metrics::{confusion_matrix, evaluate};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let preds: Vec<PredictionRecord> = (0..1291)
        .map(|i| {
            let n = rng.random_range(2..=4);
            let gold = if rng.random_bool(0.7) { 0 } else { rng.random_range(0..n) };
            let predicted = if rng.random_bool(0.74) { gold } else { (gold + 1) % n };
            PredictionRecord {
                word_id: format!("w{i:04}"),
                predicted_index: predicted,
                gold_index: Some(gold),
                n_nuclei: n,
                score: 0.0,
            }
        })
        .collect();
    let report = evaluate(&preds, "demo", 0.95, 10_000, 0).unwrap();
    print!("{}", report.to_text());
    print!("{}", confusion_matrix(&preds).unwrap().to_text());
}
