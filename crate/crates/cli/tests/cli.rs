use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 9] =
    ["stats", "augment", "correct", "build", "fit", "predict", "evaluate", "audit-tables", "delegate"];

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_subjaug"));
    cmd.env_remove("OPENAI_API_KEY");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn write_split(dir: &Path, name: &str, rows: &[(&str, &str, &str)]) -> PathBuf {
    let mut text = String::from("sentence_id\tsentence\tlabel\n");
    for (id, s, l) in rows {
        text.push_str(&format!("{id}\t{s}\t{l}\n"));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn three_rows(dir: &Path) -> PathBuf {
    write_split(
        dir,
        "three.tsv",
        &[
            ("a", "The council met on Tuesday.", "OBJ"),
            ("b", "What a disgraceful decision this was!", "SUBJ"),
            ("c", "Rates rose by two percent.", "OBJ"),
        ],
    )
}

fn shaped_split(dir: &Path, n_obj: usize, n_subj: usize) -> PathBuf {
    let mut text = String::from("sentence_id\tsentence\tlabel\n");
    for i in 0..n_obj {
        text.push_str(&format!("o{i}\tOfficials reported {i} cases on Monday.\tOBJ\n"));
    }
    for i in 0..n_subj {
        text.push_str(&format!("s{i}\tThis shameful mess number {i} is a disaster!\tSUBJ\n"));
    }
    let path = dir.join(format!("shaped_{n_obj}_{n_subj}.tsv"));
    fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn help_goldens() {
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for sub in SUBCOMMANDS {
        let help = ok(&[sub, "--help"]);
        let path = golden_dir.join(format!("help_{sub}.txt"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            fs::write(&path, &help).unwrap();
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(help, expected, "help for {sub} changed; rerun with UPDATE_GOLDEN=1 to accept");
    }
}

#[test]
fn help_lists_spec_flags() {
    let expect: [(&str, &[&str]); 5] = [
        ("augment", &["--config", "--split", "--k", "--mock", "--max-in-flight", "--out-dir", "--manifest", "--allow-any-k"]),
        ("build", &["--config", "--split", "--k", "--corrected", "--mock", "--max-in-flight", "--out-dir", "--manifest"]),
        ("fit", &["--config", "--split", "--seed", "--out-dir"]),
        ("evaluate", &["--config", "--split", "--endpoint", "--threshold-macro-f1"]),
        ("predict", &["--config", "--split", "--endpoint", "--max-in-flight", "--out-dir"]),
    ];
    for (sub, flags) in expect {
        let help = ok(&[sub, "--help"]);
        for flag in flags {
            assert!(help.contains(flag), "{sub} --help lacks {flag}");
        }
    }
}

#[test]
fn stats_prints_class_counts() {
    let dir = tempfile::tempdir().unwrap();
    let split = shaped_split(dir.path(), 532, 298);
    assert_eq!(ok(&["stats", "--split", p(&split)]), "OBJ 532 / SUBJ 298\n");
    assert_eq!(ok(&["stats", "--split", p(&split), "--json"]).trim(), r#"{"count_obj":532,"count_subj":298}"#);
}

#[test]
fn augment_mock_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    let out_dir = dir.path().join("out");
    ok(&["augment", "--mock", "--k", "2", "--split", p(&split), "--out-dir", p(&out_dir)]);
    let records = fs::read_to_string(out_dir.join("generated.balanced2.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 6);
    assert!(records.lines().all(|l| l.contains("\"stage\":\"generated\"")));
}

#[test]
fn every_mock_subcommand_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let split = shaped_split(dir.path(), 12, 7);
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[gateway]\nmock = true\nmax_in_flight = 3\n[augment]\nk = 6\n").unwrap();

    let pass = |name: &str| {
        let out = dir.path().join(name);
        let o = p(&out);
        let gen = out.join("generated.balanced6.jsonl");
        ok(&["augment", "--config", p(&cfg), "--split", p(&split), "--out-dir", o, "--manifest"]);
        ok(&["correct", "--config", p(&cfg), "--input", p(&gen), "--out-dir", o, "--manifest"]);
        ok(&["build", "--config", p(&cfg), "--split", p(&split), "--corrected", "--out-dir", o, "--manifest"]);
        ok(&["build", "--config", p(&cfg), "--split", p(&split), "--input", p(&gen), "--out-dir", o]);
        ok(&["fit", "--config", p(&cfg), "--split", p(&split), "--seed", "7", "--out-dir", o, "--manifest"]);
        let model = out.join("model.json");
        ok(&["predict", "--split", p(&split), "--model", p(&model), "--out-dir", o, "--manifest"]);
        dir_snapshot(&out)
    };
    let first = pass("one");
    let second = pass("two");
    let names: Vec<_> = first.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "generated.balanced6.jsonl",
        "corrected.jsonl",
        "corrected.stats.json",
        "train.balanced6_corrected.tsv",
        "train.balanced6_corrected.provenance.jsonl",
        "train.balanced6_corrected.manifest.json",
        "train.balanced6.tsv",
        "model.json",
        "predictions.tsv",
        "run.build.json",
    ] {
        assert!(names.contains(&expected), "missing {expected} in {names:?}");
    }
    // run manifests record the out-dir, which differs between the two passes
    let strip = |files: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        files.into_iter().filter(|(n, _)| !n.starts_with("run.")).collect()
    };
    assert_eq!(strip(first), strip(second));
}

#[test]
fn build_counts_and_run_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let split = shaped_split(dir.path(), 532, 298);
    let out = dir.path().join("out");
    let line = ok(&["build", "--mock", "--k", "2", "--split", p(&split), "--out-dir", p(&out), "--manifest"]);
    assert!(line.contains("2490 rows (OBJ 1128 / SUBJ 1362)"), "{line}");

    let run: serde_json::Value = serde_json::from_slice(&fs::read(out.join("run.build.json")).unwrap()).unwrap();
    assert_eq!(run["config"]["augment"]["k"], 2);
    assert_eq!(run["config"]["gateway"]["mock"], true);
    assert_eq!(run["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[augment]\nk = 6\n[gateway]\nmock = true\n").unwrap();
    let out = dir.path().join("o");
    ok(&["augment", "--config", p(&cfg), "--k", "2", "--split", p(&split), "--out-dir", p(&out), "--manifest"]);
    assert!(out.join("generated.balanced2.jsonl").exists());
    let run = fs::read_to_string(out.join("run.augment.json")).unwrap();
    assert!(run.contains("\"k\": 2"), "{run}");
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    let out = run(&["augment", "--mock", "--k", "3", "--split", p(&split), "--out-dir", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-any-k"));
    ok(&["augment", "--mock", "--k", "3", "--allow-any-k", "--split", p(&split), "--out-dir", p(dir.path())]);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[augment]\nkay = 2\n").unwrap();
    assert!(!run(&["stats", "--config", p(&bad), "--split", p(&split)]).status.success());
    assert!(!run(&["stats", "--split", p(&dir.path().join("missing.tsv"))]).status.success());
    assert!(!run(&["frobnicate"]).status.success());
}

#[test]
fn live_mode_needs_api_key() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    let out = bin()
        .args(["augment", "--split", p(&split), "--out-dir", p(dir.path()), "--api-key-env", "SUBJAUG_CLI_UNSET_KEY"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SUBJAUG_CLI_UNSET_KEY"));
}

#[test]
fn evaluate_threshold_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let gold = write_split(
        dir.path(),
        "gold.tsv",
        &[("1", "x", "OBJ"), ("2", "y", "SUBJ"), ("3", "z", "SUBJ"), ("4", "w", "SUBJ")],
    );
    let preds = dir.path().join("preds.tsv");
    fs::write(&preds, "sentence_id\tpred_label\tscore\n4\tSUBJ\t0.9\n3\tSUBJ\t0.8\n2\tOBJ\t0.2\n1\tOBJ\t0.4\n").unwrap();

    let table = ok(&["evaluate", "--split", p(&gold), "--predictions", p(&preds), "--threshold-macro-f1", "0.7"]);
    assert!(table.ends_with("macro-F1 0.73 (n = 4)\n"), "{table}");
    let out = run(&["evaluate", "--split", p(&gold), "--predictions", p(&preds), "--threshold-macro-f1", "0.75"]);
    assert_eq!(out.status.code(), Some(2));

    let json: serde_json::Value =
        serde_json::from_str(&ok(&["evaluate", "--split", p(&gold), "--predictions", p(&preds), "--json"])).unwrap();
    assert!((json["macro_f1"].as_f64().unwrap() - 11.0 / 15.0).abs() < 1e-12);
}

#[test]
fn fit_then_evaluate_local_model() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    ok(&["fit", "--split", p(&split), "--out-dir", p(dir.path())]);
    let model = dir.path().join("model.json");
    ok(&["evaluate", "--split", p(&split), "--model", p(&model), "--threshold-macro-f1", "1.0"]);
}

#[test]
fn audit_tables_reports_and_exits_zero() {
    let out = ok(&["audit-tables"]);
    let flagged = out
        .lines()
        .find(|l| l.contains("Sentiment-Analysis-BERT") && l.contains("balanced2_corrected"))
        .unwrap();
    assert!(flagged.contains("INCONSISTENT (expected 0.520)"), "{flagged}");
    let json: serde_json::Value = serde_json::from_str(&ok(&["audit-tables", "--json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 20);
}

#[test]
fn delegate_dry_run_uses_preset() {
    let dir = tempfile::tempdir().unwrap();
    let split = three_rows(dir.path());
    let line = ok(&[
        "delegate",
        "--model-name",
        "emotion-english-distilroberta-base",
        "--split",
        p(&split),
        "--dev",
        p(&split),
        "--dry-run",
    ]);
    assert!(line.contains("--epochs 6 --learning-rate 2e-4 --seed 42"), "{line}");
    assert!(!run(&["delegate", "--model-name", "gpt-4o", "--split", p(&split), "--dev", p(&split), "--dry-run"])
        .status
        .success());
}

#[test]
fn delegate_rescores_trainer_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let dev = write_split(dir.path(), "dev.tsv", &[("1", "x", "OBJ"), ("2", "y", "SUBJ")]);
    let script = dir.path().join("fake_trainer.sh");
    fs::write(
        &script,
        "#!/bin/sh\nwhile [ \"$1\" != \"--predictions\" ]; do shift; done\nprintf '1\\tOBJ\\t0.1\\n2\\tSUBJ\\t0.7\\n' > \"$2\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    fs::create_dir_all(&out_dir).unwrap();
    let trainer = format!("sh {}", p(&script));
    let text = ok(&[
        "delegate",
        "--model-name",
        "RoBERTa-base",
        "--split",
        p(&dev),
        "--dev",
        p(&dev),
        "--trainer-cmd",
        &trainer,
        "--out-dir",
        p(&out_dir),
        "--threshold-macro-f1",
        "0.99",
    ]);
    assert!(text.contains("macro-F1 1.00 (n = 2)"), "{text}");
}
