mod common;

use std::fs;
use std::path::Path;

use semshift::cli::{
    cmd_align, cmd_classify, cmd_eval, cmd_pipeline, cmd_rank, cmd_score, cmd_synth, cmd_train,
    RunConfig,
};
use semshift::Error;

const SMALL: &[&str] = &["sgns.dim=16", "sgns.epochs=2"];
const TARGETS: [&str; 6] = ["lord", "god", "king", "people", "house", "son"];

fn small_setup(dir: &Path, overrides: &[&str]) -> RunConfig {
    let (earlier, later) = common::write_kjv_halves(dir, Some(1500));
    let targets = common::write_targets(dir, &TARGETS);
    let all: Vec<&str> = SMALL.iter().chain(overrides).copied().collect();
    common::config(&earlier, &later, &targets, &dir.join("out"), &all)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn pipeline_equals_manual_chain() {
    for method in ["procrustes", "cca"] {
        let dir = tempfile::tempdir().unwrap();
        let m = format!("align.method={method}");
        let auto = small_setup(dir.path(), &[&m, "decision.strategy=mean"]);
        cmd_pipeline(&auto).unwrap();

        let mut manual = auto.clone();
        manual.output_dir = dir.path().join("manual");
        let spaces = cmd_train(&manual).unwrap();
        let transform = cmd_align(&manual, &spaces.earlier, &spaces.later).unwrap();
        let scores = cmd_score(&manual, &transform, &spaces.earlier, &spaces.later).unwrap();
        cmd_classify(&manual, &scores.scores).unwrap();

        let a = files(&auto.output_dir);
        assert_eq!(
            a.len(),
            6,
            "{:?}",
            a.iter().map(|f| &f.0).collect::<Vec<_>>()
        );
        assert_eq!(a, files(&manual.output_dir), "{method}");
    }
}

#[test]
fn rerunning_a_stage_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_setup(dir.path(), &[]);
    let first = cmd_pipeline(&config).unwrap();
    let before = files(&config.output_dir);
    let spaces = cmd_train(&config).unwrap();
    cmd_align(&config, &spaces.earlier, &spaces.later).unwrap();
    assert_eq!(files(&config.output_dir), before);
    assert!(first.scores.is_some());

    let mut other_seed = config.clone();
    other_seed.seed = 99;
    other_seed.output_dir = dir.path().join("other");
    cmd_pipeline(&other_seed).unwrap();
    assert_ne!(
        fs::read(other_seed.output("scores.tsv")).unwrap(),
        fs::read(config.output("scores.tsv")).unwrap()
    );
}

#[test]
fn validation_happens_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_setup(dir.path(), &["decision.strategy=fixed"]);
    let err = cmd_pipeline(&config).unwrap_err();
    assert_eq!(err.stage, "pipeline");
    assert!(matches!(err.source, Error::Config(_)));
    assert!(!config.output_dir.exists());

    config.decision.fixed_t = Some(0.2);
    config.corpus.later = dir.path().join("missing.txt");
    let err = cmd_train(&config).unwrap_err();
    assert_eq!(err.stage, "train");
    assert!(err.to_string().starts_with("[train] invalid configuration"));
    assert!(!config.output_dir.exists());
}

#[test]
fn failing_stage_keeps_earlier_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_setup(dir.path(), &[]);
    cmd_pipeline(&config).unwrap();
    let before = files(&config.output_dir);
    // a transform of the wrong dimension makes scoring fail
    let bad = dir.path().join("bad_transform.txt");
    fs::write(&bad, "procrustes true 2\n1 0\n0 1\n").unwrap();
    let err = cmd_score(
        &config,
        &bad,
        &config.output("earlier.vec"),
        &config.output("later.vec"),
    )
    .unwrap_err();
    assert_eq!(err.stage, "score");
    assert_eq!(files(&config.output_dir), before);
}

#[test]
fn fixed_threshold_and_self_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_setup(
        dir.path(),
        &["decision.strategy=fixed", "decision.fixed_t=0"],
    );
    let out = cmd_pipeline(&config).unwrap();
    let decisions = fs::read_to_string(&out.decisions).unwrap();
    assert_eq!(decisions.lines().count(), TARGETS.len());
    assert!(decisions.lines().all(|l| l.split('\t').nth(1) == Some("1")));
    let report = cmd_eval(&out.decisions, &out.decisions).unwrap();
    assert_eq!((report.accuracy, report.correct, report.total), (1.0, 6, 6));
}

#[test]
fn missing_target_is_reported_not_scored() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_setup(dir.path(), &[]);
    let mut with_unknown = TARGETS.to_vec();
    with_unknown.push("zzyzx");
    common::write_targets(dir.path(), &with_unknown);
    cmd_pipeline(&config).unwrap();
    let scores = fs::read_to_string(config.output("scores.tsv")).unwrap();
    assert_eq!(scores.lines().count(), TARGETS.len());
    assert_eq!(
        fs::read_to_string(config.output("missing.tsv")).unwrap(),
        "zzyzx\tboth\n"
    );
}

#[test]
fn synth_then_pipeline_with_gold() {
    let dir = tempfile::tempdir().unwrap();
    let (earlier, later) = common::write_kjv_halves(dir.path(), Some(4000));
    let plan = dir.path().join("plan.toml");
    fs::write(
        &plan,
        "stable_words = [\"lord\", \"god\"]\n[[pseudo_targets]]\ntarget = \"king\"\ndonor = \"land\"\nfraction = 0.75\n",
    )
    .unwrap();
    let targets = common::write_targets(dir.path(), &["king", "lord", "god"]);
    let synth = common::config(
        &earlier,
        &later,
        &targets,
        &dir.path().join("synth"),
        &["seed=3"],
    );
    let out = cmd_synth(&synth, &plan).unwrap();
    assert_eq!(
        fs::read_to_string(&out.gold).unwrap(),
        "god\t0\nking\t1\nlord\t0\n"
    );
    let injected = fs::read_to_string(&out.corpus).unwrap();
    let original = fs::read_to_string(&later).unwrap();
    assert_eq!(injected.lines().count(), original.lines().count());
    assert!(
        injected.split_whitespace().filter(|w| *w == "land").count()
            < original.split_whitespace().filter(|w| *w == "land").count()
    );

    let gold = format!("gold={:?}", out.gold);
    let run = common::config(
        &earlier,
        &out.corpus,
        &targets,
        &dir.path().join("run"),
        &["sgns.dim=16", &gold],
    );
    let result = cmd_pipeline(&run).unwrap();
    let eval = result.eval.unwrap();
    assert_eq!(eval.total, 3);
    let text = fs::read_to_string(run.output("eval.tsv")).unwrap();
    assert!(text.starts_with("accuracy\t"));

    let bad_plan = dir.path().join("bad.toml");
    fs::write(
        &bad_plan,
        "[[pseudo_targets]]\ntarget = \"king\"\ndonor = \"qqq\"\nfraction = 0.5\n",
    )
    .unwrap();
    let err = cmd_synth(&synth, &bad_plan).unwrap_err();
    assert!(matches!(err.source, Error::Plan(_)));
}

/// A three-column corpus with a fake tagger and lemmatizer, so every variant
/// has distinct units.
fn write_tagged(dir: &Path, name: &str, lines: &[String]) -> std::path::PathBuf {
    let mut text = String::new();
    for line in lines {
        for w in line.split_whitespace() {
            let pos = if w.len() > 3 { "NOUN" } else { "DET" };
            let lemma = w.strip_suffix('s').filter(|l| !l.is_empty()).unwrap_or(w);
            text.push_str(&format!("{w}\t{pos}\t{lemma}\n"));
        }
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn rank_over_several_variants() {
    let dir = tempfile::tempdir().unwrap();
    let lines = common::kjv_lines();
    let earlier: Vec<String> = lines.iter().step_by(2).take(1500).cloned().collect();
    let later: Vec<String> = lines
        .iter()
        .skip(1)
        .step_by(2)
        .take(1500)
        .cloned()
        .collect();
    let e = write_tagged(dir.path(), "earlier.tsv", &earlier);
    let l = write_tagged(dir.path(), "later.tsv", &later);
    let targets = common::write_targets(dir.path(), &TARGETS);
    let config = common::config(
        &e,
        &l,
        &targets,
        &dir.path().join("out"),
        &[
            "corpus.format=tsv",
            "corpus.variant=lemma",
            "ranking.variants=[\"form\", \"form_pos\", \"lemma_pos\"]",
            "ranking.blocks=[[8, 9]]",
            "ranking.runs_per_pair=3",
            "align.dictionary_size=300",
            "sgns.epochs=2",
            "decision.strategy=ranking",
        ],
    );
    let out = cmd_pipeline(&config).unwrap();
    let stability = fs::read_to_string(config.output("stability.tsv")).unwrap();
    let variants: Vec<(&str, &str)> = stability
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(
        variants,
        [
            ("form", "8"),
            ("form", "9"),
            ("form_pos", "8"),
            ("form_pos", "9"),
            ("lemma", "8"),
            ("lemma", "9"),
            ("lemma_pos", "8"),
            ("lemma_pos", "9")
        ]
    );
    // POS variants resolve the plain targets to tagged units
    let ledger = fs::read_to_string(config.output("runs.tsv")).unwrap();
    let pos_rows = ledger
        .lines()
        .filter(|l| l.starts_with("form_pos:d8\t"))
        .count();
    assert_eq!(pos_rows, 3 * TARGETS.len());
    assert_eq!(
        fs::read_to_string(&out.decisions).unwrap().lines().count(),
        TARGETS.len()
    );
    assert_eq!(
        fs::read_to_string(config.output("summary.tsv"))
            .unwrap()
            .lines()
            .count(),
        TARGETS.len()
    );

    // same seed, same ledger
    let again = RunConfig {
        output_dir: dir.path().join("again"),
        ..config.clone()
    };
    cmd_rank(&again).unwrap();
    assert_eq!(
        ledger,
        fs::read_to_string(again.output("runs.tsv")).unwrap()
    );
}
