// Word forms used as identity in the corpus analyses.
use stresskit::corpus::{normalize_digraphs, word_form};

fn main() {
    for w in ["ljubav", "Njegov", "džep", "konjski", "ǉudi", "Podžupan"] {
        let n = normalize_digraphs(w);
        println!("{w:<10} -> {n:<8} ({} -> {} chars)  form {}", w.chars().count(), n.chars().count(), word_form(w));
    }
}
