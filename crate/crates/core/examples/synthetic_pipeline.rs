// The command line end to end on a generated corpus:
// synth -> ingest -> features -> train -> predict -> eval.
use stresskit::cli::main_with_args;

fn step(args: &[&str]) {
    let mut v = vec!["stresskit"];
    v.extend_from_slice(args);
    println!("$ stresskit {}", args.join(" "));
    let code = main_with_args(v);
    assert_eq!(code, 0, "step failed");
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let p = |s: &str| root.join(s).display().to_string();

    step(&["synth", "--words", "200", "--speakers", "4", "--seed", "9", "--out", &p("synth")]);
    step(&["ingest", "--list", &p("synth/corpus/corpus.tsv"), "--out", &p("ingest")]);
    step(&["features", "--manifest", &p("ingest/manifest.jsonl"), "--out", &p("features")]);
    step(&["train", "--features", &p("features/features.jsonl"), "--out", &p("train")]);
    step(&["predict", "--model", &p("train/model.json"), "--features", &p("features/features.jsonl"), "--out", &p("predict")]);
    step(&["eval", "--predictions", &p("predict/predictions.jsonl"), "--dataset", "synth", "--out", &p("eval")]);

    println!();
    print!("{}", std::fs::read_to_string(root.join("eval/eval.txt")).unwrap());
    print!("{}", std::fs::read_to_string(root.join("eval/confusion.txt")).unwrap());
}
