use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{check_exists, Conf};
use super::*;
use crate::audio;
use crate::corpus::{build_manifest, read_textgrid, Gender, ManifestOptions, Reject, WordRecord};
use crate::curve::{learning_curve, CurveConfig};
use crate::dataset::{self, FeatureRow};
use crate::framecodec::{self, FrameLabelSeq, PredictionRecord};
use crate::jsonl;
use crate::metrics;
use crate::prosody::{contour_rows, ContourRow, ProsodyTracks, WORD_PADDING_S};
use crate::svm::{self, search, Gamma, KernelKind, SvmModel, SvmParams};
use crate::synth;

pub(super) fn dispatch(cmd: &Command, conf: &mut Conf, run: &mut RunDir, seed: u64) -> Result<(), CliError> {
    match cmd {
        Command::Ingest(a) => ingest(a, conf, run),
        Command::Features(a) => features(a, conf, run),
        Command::Train(a) => train(a, conf, run, seed),
        Command::Predict(a) => predict(a, conf, run),
        Command::Encode(a) => encode(a, conf, run),
        Command::Decode(a) => decode(a, conf, run),
        Command::Eval(a) => eval(a, conf, run, seed),
        Command::Agree(a) => agree(a, conf, run),
        Command::Analyze(a) => analyze(a, conf, run),
        Command::Curve(a) => curve(a, conf, run, seed),
        Command::Synth(a) => synth_corpus(a, conf, run, seed),
    }
}

fn read_manifest(path: &Path) -> Result<Vec<WordRecord>, CliError> {
    Ok(jsonl::read(path)?)
}

fn read_features(path: &Path) -> Result<Vec<FeatureRow>, CliError> {
    Ok(jsonl::read(path)?)
}

fn named_paths(items: Vec<String>) -> Result<Vec<(String, PathBuf)>, CliError> {
    items
        .into_iter()
        .map(|s| match s.split_once('=') {
            Some((n, p)) if !n.is_empty() && !p.is_empty() => {
                let p = PathBuf::from(p);
                check_exists(&p)?;
                Ok((n.to_string(), p))
            }
            _ => Err(CliError::Usage(format!("expected NAME=PATH, got {s:?}"))),
        })
        .collect()
}

fn svm_params(a: &SvmArgs, conf: &mut Conf, seed: u64) -> Result<SvmParams, CliError> {
    let d = SvmParams::default();
    let gamma: String = conf.or("gamma", a.gamma.clone(), "scale".into())?;
    let kernel: String = conf.or("kernel", a.kernel.clone(), "rbf".into())?;
    let no_standardize = conf.switch("no_standardize", a.no_standardize)?;
    Ok(SvmParams {
        c: conf.or("c", a.c, d.c)?,
        gamma: gamma.parse::<Gamma>()?,
        kernel: kernel.parse::<KernelKind>()?,
        tol: conf.or("tol", a.tol, d.tol)?,
        max_passes: conf.or("max_passes", a.max_passes, d.max_passes)?,
        seed,
        standardize: !no_standardize,
        platt: true,
    })
}

fn ingest(a: &IngestArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let base = ManifestOptions::default();
    let stress_tier: String = conf.or("stress_tier", a.stress_tier.clone(), "stress".into())?;
    let symbols: String = conf.or(
        "error_symbols",
        a.error_symbols.clone(),
        base.error_symbols.iter().collect(),
    )?;
    let gender: String = conf.or("gender", a.gender.clone(), "unknown".into())?;
    let opts = ManifestOptions {
        word_tier: conf.or("word_tier", a.word_tier.clone(), base.word_tier)?,
        nucleus_tier: conf.or("nucleus_tier", a.nucleus_tier.clone(), base.nucleus_tier)?,
        stress_tier: (stress_tier != "none").then_some(stress_tier),
        error_symbols: symbols.chars().collect(),
        speaker_id: conf.or("speaker", a.speaker.clone(), String::new())?,
        gender: gender.parse::<Gender>().map_err(CliError::Usage)?,
        dataset: conf.or("dataset", a.dataset.clone(), String::new())?,
    };

    // (textgrid, audio path as recorded, options)
    let mut jobs: Vec<(PathBuf, String, ManifestOptions)> = Vec::new();
    let list: Option<PathBuf> = conf.value("list", a.list.clone())?;
    if let Some(list) = list {
        check_exists(&list)?;
        let dir = list.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut reader = csv::ReaderBuilder::new().delimiter(b'\t').from_path(&list)?;
        for row in reader.records() {
            let row = row?;
            let field = |i: usize| row.get(i).unwrap_or("").trim().to_string();
            let tg = dir.join(field(0));
            let wav = dir.join(field(1)).display().to_string();
            let mut o = opts.clone();
            if !field(2).is_empty() {
                o.speaker_id = field(2);
            }
            if !field(3).is_empty() {
                o.gender = field(3).parse().map_err(CliError::Usage)?;
            }
            if !field(4).is_empty() {
                o.dataset = field(4);
            }
            jobs.push((tg, wav, o));
        }
    } else {
        let tg = conf.existing("textgrid", a.textgrid.clone())?;
        let wav: String = conf.required("wav", a.wav.clone())?;
        check_exists(Path::new(&wav))?;
        jobs.push((tg, wav, opts));
    }

    let mut records = Vec::new();
    let mut rejects: Vec<Reject> = Vec::new();
    for (tg, wav, o) in &jobs {
        check_exists(tg)?;
        let doc = read_textgrid(tg)?;
        let out = build_manifest(&doc, wav, o).map_err(|source| CliError::Manifest {
            context: tg.display().to_string(),
            source,
        })?;
        records.extend(out.records);
        rejects.extend(out.rejects);
    }
    records.sort_by(|x, y| x.word_id.cmp(&y.word_id));
    rejects.sort_by(|x, y| x.word_id.cmp(&y.word_id));
    for r in &rejects {
        run.warn(format!("rejected {}: {}", r.word_id, r.reason));
    }
    run.info(format!("{} words kept, {} rejected from {} TextGrid(s)", records.len(), rejects.len(), jobs.len()));
    jsonl::write(run.output("manifest.jsonl"), &records)?;
    jsonl::write(run.output("rejects.jsonl"), &rejects)?;
    Ok(())
}

#[derive(Serialize)]
struct ContourDump {
    word_id: String,
    frames: Vec<ContourRow>,
}

fn features(a: &FeaturesArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let manifest = conf.existing("manifest", a.manifest.clone())?;
    let root: PathBuf = conf.or("audio_root", a.audio_root.clone(), PathBuf::from("."))?;
    let dump = conf.switch("contours", a.contours)?;
    let records = read_manifest(&manifest)?;
    let (rows, skipped) = dataset::extract_features(&records, &root);
    for s in &skipped {
        run.warn(format!("skipped {}: {}", s.word_id, s.reason));
    }
    let flagged = rows.iter().filter(|r| r.flags.any()).count();
    run.info(format!(
        "{} nucleus rows from {} words; {} skipped; {} rows with a neutral contour",
        rows.len(),
        records.len() - skipped.len(),
        skipped.len(),
        flagged
    ));
    jsonl::write(run.output("features.jsonl"), &rows)?;
    jsonl::write(run.output("skipped.jsonl"), &skipped)?;

    if dump {
        let mut by_file: BTreeMap<&str, Vec<&WordRecord>> = BTreeMap::new();
        for r in &records {
            by_file.entry(&r.audio_path).or_default().push(r);
        }
        let mut dumps: Vec<ContourDump> = by_file
            .par_iter()
            .flat_map_iter(|(path, words)| {
                let clip = audio::load_canonical(dataset::resolve_audio(&root, path)).ok();
                words
                    .iter()
                    .filter_map(|w| {
                        let clip = clip.as_ref()?;
                        let c = audio::slice_absolute_clamped(clip, w.t0 - WORD_PADDING_S, w.t1 + WORD_PADDING_S).ok()?;
                        Some(ContourDump {
                            word_id: w.word_id.clone(),
                            frames: contour_rows(&ProsodyTracks::compute(&c)),
                        })
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        dumps.sort_by(|x, y| x.word_id.cmp(&y.word_id));
        jsonl::write(run.output("contours.jsonl"), &dumps)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    n_instances: usize,
    n_words: usize,
    kernel: KernelKind,
    c: f64,
    gamma: f64,
    n_support_vectors: usize,
    iterations: usize,
    objective: f64,
    gap: f64,
}

fn train(a: &TrainArgs, conf: &mut Conf, run: &mut RunDir, seed: u64) -> Result<(), CliError> {
    let path = conf.existing("features", a.features.clone())?;
    let mut params = svm_params(&a.svm, conf, seed)?;
    let do_search = conf.switch("search", a.search)?;
    let rows = read_features(&path)?;
    let data = dataset::to_instances(&rows);
    if data.len() < rows.len() {
        run.warn(format!("{} unlabelled rows ignored", rows.len() - data.len()));
    }

    if do_search {
        let valid_path = conf.existing("valid_features", a.valid_features.clone())?;
        let valid = dataset::to_instances(&read_features(&valid_path)?);
        let grid = search::grid_search(&data, &valid, &params)?;
        let mut w = csv::Writer::from_path(run.output("grid.csv"))?;
        w.write_record(["kernel", "c", "word_accuracy", "n_words"])?;
        for g in &grid {
            w.write_record([g.kernel.to_string(), g.c.to_string(), g.word_accuracy.to_string(), g.n_words.to_string()])?;
        }
        w.flush().map_err(|e| CliError::io(&run.dir, e))?;
        let best = search::best(&grid).expect("non-empty grid");
        run.info(format!("grid search picked kernel={} C={} ({:.4})", best.kernel, best.c, best.word_accuracy));
        params.kernel = best.kernel;
        params.c = best.c;
    }

    let report = svm::train_svm_report(&data, &params)?;
    let words: BTreeSet<&str> = data.iter().map(|t| t.word_id.as_str()).collect();
    let summary = TrainSummary {
        n_instances: data.len(),
        n_words: words.len(),
        kernel: report.model.kernel,
        c: report.model.c,
        gamma: report.model.gamma,
        n_support_vectors: report.model.support_vectors.len(),
        iterations: report.iterations,
        objective: report.objective,
        gap: report.gap,
    };
    run.info(format!(
        "trained on {} nuclei / {} words: {} support vectors, {} iterations",
        summary.n_instances, summary.n_words, summary.n_support_vectors, summary.iterations
    ));
    report.model.save(run.output("model.json"))?;
    run.write_json("train.json", &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct AccuracySummary {
    n_words: usize,
    accuracy: f64,
}

fn predict(a: &PredictArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let model = SvmModel::load(conf.existing("model", a.model.clone())?)?;
    let rows = read_features(&conf.existing("features", a.features.clone())?)?;
    let preds = dataset::predict_rows(&model, &rows)?;
    run.info(format!("{} words predicted", preds.len()));
    framecodec::write_predictions(run.output("predictions.jsonl"), &preds)?;
    if !preds.is_empty() && preds.iter().all(|p| p.gold_index.is_some()) {
        let accuracy = metrics::word_accuracy(&preds)?;
        run.write_json(
            "accuracy.json",
            &AccuracySummary {
                n_words: preds.len(),
                accuracy,
            },
        )?;
    }
    Ok(())
}

fn encode(a: &EncodeArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let records = read_manifest(&conf.existing("manifest", a.manifest.clone())?)?;
    let mut seqs: Vec<FrameLabelSeq> = Vec::new();
    let mut empty = Vec::new();
    for r in &records {
        match framecodec::encode_labels(r) {
            Ok(enc) => {
                if enc.empty_nucleus {
                    empty.push(r.word_id.clone());
                }
                seqs.push(enc.seq);
            }
            Err(e) => run.warn(format!("not encoded: {e}")),
        }
    }
    for id in &empty {
        run.warn(format!("{id}: stressed nucleus holds no frame midpoint; all labels are 0"));
    }
    run.info(format!("{} words encoded, {} with all-zero labels", seqs.len(), empty.len()));
    jsonl::write(run.output("labels.jsonl"), &seqs)?;
    Ok(())
}

fn decode(a: &DecodeArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let records = read_manifest(&conf.existing("manifest", a.manifest.clone())?)?;
    let logits = framecodec::read_logits(conf.existing("logits", a.logits.clone())?)?;
    let words: BTreeMap<&str, &WordRecord> = records.iter().map(|r| (r.word_id.as_str(), r)).collect();
    let mut preds = Vec::with_capacity(logits.len());
    for l in &logits {
        let w = words
            .get(l.word_id.as_str())
            .ok_or_else(|| CliError::Usage(format!("logits for unknown word {}", l.word_id)))?;
        preds.push(framecodec::decode_logits(l, w)?);
    }
    let seen: BTreeSet<&str> = logits.iter().map(|l| l.word_id.as_str()).collect();
    let missing = records.iter().filter(|r| !seen.contains(r.word_id.as_str())).count();
    if missing > 0 {
        run.warn(format!("{missing} manifest words have no logits"));
    }
    preds.sort_by(|x, y| x.word_id.cmp(&y.word_id));
    run.info(format!("{} words decoded", preds.len()));
    framecodec::write_predictions(run.output("predictions.jsonl"), &preds)?;
    Ok(())
}

fn eval(a: &EvalArgs, conf: &mut Conf, run: &mut RunDir, seed: u64) -> Result<(), CliError> {
    let preds: Vec<PredictionRecord> = framecodec::read_predictions(conf.existing("predictions", a.predictions.clone())?)?;
    let dataset: String = conf.or("dataset", a.dataset.clone(), String::new())?;
    let level = conf.or("level", a.level, 0.95)?;
    let resamples = conf.or("resamples", a.resamples, 10_000usize)?;
    let report = metrics::evaluate(&preds, &dataset, level, resamples, seed)?;
    let cm = metrics::confusion_matrix(&preds)?;
    run.info(format!(
        "accuracy {:.4} [{:.4}, {:.4}] over {} words",
        report.accuracy, report.ci_low, report.ci_high, report.n_words
    ));
    run.write_json("eval.json", &report)?;
    run.write_text("eval.txt", &report.to_text())?;
    run.write_json("confusion.json", &cm)?;
    run.write_text("confusion.csv", &cm.to_csv())?;
    run.write_text("confusion.txt", &cm.to_text())?;
    Ok(())
}

fn agree(a: &AgreeArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let load = |p: PathBuf| -> Result<BTreeMap<String, usize>, CliError> {
        Ok(read_manifest(&p)?
            .into_iter()
            .filter_map(|r| r.stress_index.map(|s| (r.word_id, s)))
            .collect())
    };
    let ma = load(conf.existing("a", a.a.clone())?)?;
    let mb = load(conf.existing("b", a.b.clone())?)?;
    let rep = metrics::agreement_report(&ma, &mb)?;
    let alpha = rep.alpha.map_or("undefined".to_string(), |x| format!("{x:.4}"));
    run.info(format!(
        "{} common words, observed agreement {:.4}, alpha {alpha}",
        rep.n_items, rep.observed_agreement
    ));
    run.write_json("agreement.json", &rep)?;
    run.write_text(
        "agreement.txt",
        &format!(
            "{:<20} {}\n{:<20} {:.4}\n{:<20} {}\n",
            "items", rep.n_items, "observed_agreement", rep.observed_agreement, "krippendorff_alpha", alpha
        ),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct Analysis {
    variation: metrics::StressVariation,
    overlap: BTreeMap<String, metrics::Overlap>,
}

fn analyze(a: &AnalyzeArgs, conf: &mut Conf, run: &mut RunDir) -> Result<(), CliError> {
    let train = read_manifest(&conf.existing("train", a.train.clone())?)?;
    let min_count = conf.or("min_count", a.min_count, 5usize)?;
    let tests: Vec<String> = conf.or("test", Some(a.test.clone()).filter(|v| !v.is_empty()), Vec::new())?;
    let variation = metrics::stress_variation(&train, min_count);
    let mut overlap = BTreeMap::new();
    for (name, path) in named_paths(tests)? {
        overlap.insert(name, metrics::crosslingual_overlap(&train, &read_manifest(&path)?));
    }
    let mut text = format!(
        "stress variation (forms with >= {} occurrences)\n  eligible {}\n  varying  {} ({:.2}%)\n",
        min_count,
        variation.eligible_words,
        variation.varying_words,
        100.0 * variation.varying_fraction
    );
    if !overlap.is_empty() {
        let _ = writeln!(text, "\n{:<12} {:>8} {:>9} {:>8} {:>8}", "test", "forms", "overlap", "unseen", "unseen%");
        for (name, o) in &overlap {
            let _ = writeln!(
                text,
                "{:<12} {:>8} {:>4} ({:>2.0}%) {:>8} {:>7.0}%",
                name,
                o.test_forms,
                o.overlap_words,
                100.0 * o.overlap_fraction,
                o.unseen_stress_words,
                100.0 * o.unseen_fraction
            );
        }
    }
    run.info(format!(
        "{} of {} eligible forms vary in stress position",
        variation.varying_words, variation.eligible_words
    ));
    run.write_json("analysis.json", &Analysis { variation, overlap })?;
    run.write_text("analysis.txt", &text)?;
    Ok(())
}

fn curve(a: &CurveArgs, conf: &mut Conf, run: &mut RunDir, seed: u64) -> Result<(), CliError> {
    let train = read_features(&conf.existing("train_features", a.train_features.clone())?)?;
    let tests: Vec<String> = conf.or("test", Some(a.test.clone()).filter(|v| !v.is_empty()), Vec::new())?;
    if tests.is_empty() {
        return Err(CliError::Usage("at least one --test NAME=FEATURES is required".into()));
    }
    let tests = named_paths(tests)?
        .into_iter()
        .map(|(n, p)| Ok((n, read_features(&p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let d = CurveConfig::default();
    let cfg = CurveConfig {
        sizes: conf.or("sizes", a.sizes.clone(), d.sizes)?,
        repeats: conf.or("repeats", a.repeats, d.repeats)?,
        seed,
        params: svm_params(&a.svm, conf, seed)?,
    };
    let manifest: Option<PathBuf> = conf.value("manifest", a.manifest.clone())?;
    let result = learning_curve(&train, &tests, &cfg)?;
    for s in &result.skipped_sizes {
        run.warn(format!("size {s} exceeds the training corpus; skipped"));
    }
    let f = std::fs::File::create(run.output("curve.csv")).map_err(|e| CliError::io(&run.dir, e))?;
    result.write_csv(f)?;
    for s in &result.summaries {
        run.info(format!("size {}: mean {:?} sd {:?}", s.train_size, s.mean, s.sd));
    }

    if let Some(path) = manifest {
        check_exists(&path)?;
        let records = read_manifest(&path)?;
        let dir = run.dir.join("subsets");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for p in &result.points {
            let ids: BTreeSet<&str> = p.word_ids.iter().map(String::as_str).collect();
            let subset: Vec<&WordRecord> = records.iter().filter(|r| ids.contains(r.word_id.as_str())).collect();
            let name = format!("subsets/size{:04}_rep{:02}.jsonl", p.train_size, p.repeat);
            jsonl::write(run.output(&name), &subset)?;
        }
    }
    Ok(())
}

fn synth_corpus(a: &SynthArgs, conf: &mut Conf, run: &mut RunDir, seed: u64) -> Result<(), CliError> {
    let d = synth::SynthConfig::default();
    let cfg = synth::SynthConfig {
        n_words: conf.or("words", a.words, d.n_words)?,
        n_speakers: conf.or("speakers", a.speakers, d.n_speakers)?,
        dataset: conf.or("dataset", a.dataset.clone(), d.dataset)?,
        seed,
        ..d
    };
    let recs = synth::generate(&cfg);
    let dir = run.dir.join("corpus");
    synth::write_corpus(&dir, &recs, &cfg.dataset).map_err(|e| CliError::io(&dir, e))?;
    run.output(&format!("corpus/{}", synth::LISTING));
    run.info(format!("{} words in {} recordings", cfg.n_words, recs.len()));
    Ok(())
}
