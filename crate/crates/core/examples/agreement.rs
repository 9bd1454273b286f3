// Agreement between two annotators of the stressed syllable.
use std::collections::BTreeMap;

use stresskit::metrics::agreement_report;

fn main() {
    let a = [0, 0, 1, 0, 2, 0, 1, 0, 0, 1, 0, 2, 0, 0, 1, 0, 0, 0, 1, 0];
    let b = [0, 0, 1, 0, 2, 0, 0, 0, 0, 1, 0, 2, 0, 0, 1, 0, 0, 1, 1, 0];
    let map = |v: &[usize]| -> BTreeMap<String, usize> {
        v.iter().enumerate().map(|(i, &s)| (format!("word{i:02}"), s)).collect()
    };
    let rep = agreement_report(&map(&a), &map(&b)).unwrap();
    println!("items {}", rep.n_items);
    println!("observed agreement {:.3}", rep.observed_agreement);
    match rep.alpha {
        Some(x) => println!("krippendorff alpha {x:.3}"),
        None => println!("krippendorff alpha undefined"),
    }
}
