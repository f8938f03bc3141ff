use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use socialgen::pipeline::{sha256_hex, RunManifest, FAILED_MARKER};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_socialgen"));
    c.env_remove("SOCIALGEN_OUTPUT_ROOT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// File name to bytes for every file under `dir`, manifests excluded.
fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.to_string_lossy().ends_with("manifest.json") {
                out.push((
                    path.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

const TINY: [&str; 8] = [
    "--set",
    "d_emb=8",
    "--set",
    "d_h=8",
    "--set",
    "max_epochs=2",
    "--set",
    "max_len=12",
];

/// A small synthetic corpus in `dir`.
fn synth(dir: &Path) {
    let o = run(&["synth", "--seed", "3", "--drivers", "30", "-o", p(dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec![],
        vec!["synth", "--no-such-flag"],
        vec!["analyze"],
        vec!["analyze", "--pairs", "x.tsv", "--dependent", "happiness"],
        vec!["train", "--pairs", "x.tsv", "--variant", "transformer"],
        vec!["generate", "--model", "m.ckpt"],
        vec!["synth", "--drivers", "many"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(
            err.contains("Usage") || err.contains("invalid value"),
            "{args:?}"
        );
    }
    for args in [["frobnicate"], ["--bogus"]] {
        let err = String::from_utf8_lossy(&run(&args).stderr).into_owned();
        assert!(err.contains("Usage: socialgen <COMMAND>"), "{err}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    for sub in [
        "synth", "ingest", "score", "analyze", "train", "generate", "evaluate", "enhance",
        "report", "pipeline",
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        assert!(text(&o).contains("Usage"), "{sub}");
    }
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.tsv");
    let o = run(&["analyze", "--pairs", p(&missing), "-o", p(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "not\ta\tpairs\tfile\n").unwrap();
    assert_eq!(
        code(&run(&["score", "--pairs", p(&bad), "-o", p(dir.path())])),
        1
    );

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        code(&run(&[
            "pipeline",
            "--config",
            p(&cfg),
            "-o",
            p(dir.path())
        ])),
        1
    );
    assert_eq!(
        code(&run(&["pipeline", "--set", "seed", "-o", p(dir.path())])),
        1
    );
    assert_eq!(
        code(&run(&[
            "report",
            "--dir",
            p(dir.path()),
            "-o",
            p(dir.path())
        ])),
        1
    );
}

#[test]
fn synth_twice_gives_identical_trees() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = run(&["synth", "--seed", "7", "--drivers", "100", "-o", p(d)]);
        assert_eq!(code(&o), 0);
    }
    let ta = tree(&a);
    assert_eq!(ta.len(), 3);
    assert_eq!(ta, tree(&b));
    let ma = RunManifest::read(&a.join("synth.manifest.json")).unwrap();
    let mb = RunManifest::read(&b.join("synth.manifest.json")).unwrap();
    assert!(ma.same_results(&mb));
    assert_eq!(ma.outputs.len(), 3);

    let c = dir.path().join("c");
    run(&["synth", "--seed", "8", "--drivers", "100", "-o", p(&c)]);
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("root");
    let o = bin()
        .args(["synth", "--drivers", "5"])
        .env("SOCIALGEN_OUTPUT_ROOT", &root)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(root.join("pairs.tsv").is_file());
    assert!(!dir.path().join("socialgen-out").exists());
}

#[test]
fn analyze_prints_coefficient_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--drivers", "120", "-o", p(dir.path())]);
    assert_eq!(code(&o), 0);
    let pairs = dir.path().join("pairs.tsv");
    let before = sha256_hex(&fs::read(&pairs).unwrap());
    let out = dir.path().join("analysis");
    let o = run(&[
        "analyze",
        "--pairs",
        p(&pairs),
        "--dependent",
        "responded_24h",
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = text(&o);
    for needle in [
        "Model 1 [responded_24h]",
        "Model 3",
        "Politeness",
        "Positivity",
        "*:p<0.05",
    ] {
        assert!(t.contains(needle), "{needle}\n{t}");
    }
    assert!(!t.contains("first_trip_7d"));
    assert!(out.join("analysis.json").is_file());
    assert_eq!(
        sha256_hex(&fs::read(&pairs).unwrap()),
        before,
        "input mutated"
    );
}

#[test]
fn ingest_and_score() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let names = dir.path().join("names.txt");
    fs::write(&names, "Maria\nJames\n").unwrap();
    let out = dir.path().join("ingested");
    let o = run(&[
        "ingest",
        "--conversations",
        p(&dir.path().join("conversations.tsv")),
        "--drivers",
        p(&dir.path().join("drivers.tsv")),
        "--names",
        p(&names),
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["score", "--pairs", p(&out.join("pairs.tsv")), "-o", p(&out)]);
    assert_eq!(code(&o), 0);
    let scores = fs::read_to_string(out.join("scores.tsv")).unwrap();
    assert!(scores.starts_with("driver_id\tagent_ts\tpoliteness\tpositivity"));
    assert!(scores.lines().count() > 30);
    let m = RunManifest::read(&out.join("ingest.manifest.json")).unwrap();
    assert_eq!(m.inputs.len(), 3);
}

#[test]
fn train_generate_evaluate_enhance_report() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let pairs = dir.path().join("pairs.tsv");
    let out = dir.path().join("run");
    for variant in ["lexical", "lexical_social"] {
        let mut args = vec![
            "train",
            "--pairs",
            p(&pairs),
            "--variant",
            variant,
            "--seed",
            "3",
            "-o",
            p(&out),
        ];
        args.extend(TINY);
        let o = run(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(text(&o).starts_with("epoch\ttrain_loss\tval_loss\twall_ms\n"));
    }
    let lexical = out.join("models/lexical.ckpt");
    let social = out.join("models/lexical_social.ckpt");

    let o = run(&[
        "generate",
        "--model",
        p(&lexical),
        "--prompt",
        "when can i drive?",
    ]);
    assert_eq!(code(&o), 0);
    assert!(text(&o).ends_with('\n'));
    let o = run(&[
        "generate",
        "--model",
        p(&social),
        "--prompt",
        "when can i drive?",
    ]);
    assert_eq!(code(&o), 1, "social model needs a social vector");
    let o = run(&[
        "generate",
        "--model",
        p(&social),
        "--prompt",
        "when can i drive?",
        "--politeness",
        "1.2",
        "--positivity",
        "-0.1",
    ]);
    assert_eq!(code(&o), 0);

    let mut child = bin()
        .args([
            "generate",
            "--model",
            p(&social),
            "--interactive",
            "--politeness",
            "0.5",
            "--positivity",
            "0.2",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"how do i upload my license\n\nwhen can i drive --politeness 2\nhi --positivity\nquit\nnever read\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(text(&o).lines().count(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--positivity needs a value"));

    let mut args = vec![
        "evaluate",
        "--lexical",
        p(&lexical),
        "--social",
        p(&social),
        "--pairs",
        p(&pairs),
        "--seed",
        "3",
        "-o",
        p(&out),
    ];
    args.extend(TINY);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(text(&o).contains("BLEU"));

    let o = run(&[
        "evaluate",
        "--lexical",
        p(&lexical),
        "--social",
        p(&social),
        "--pairs",
        p(&pairs),
        "--seed",
        "4",
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&o), 1, "a different split must be refused");

    let o = run(&[
        "enhance",
        "--model",
        p(&social),
        "--pairs",
        p(&pairs),
        "--seed",
        "3",
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(text(&o).contains("Politeness") && text(&o).contains("Positivity"));
    let o = run(&[
        "enhance",
        "--model",
        p(&lexical),
        "--pairs",
        p(&pairs),
        "--seed",
        "3",
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&o), 1, "lexical model cannot be enhanced");

    let o = run(&["report", "--dir", p(&out), "-o", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = text(&o);
    for table in ["Table 1.", "Table 2.", "Table 3.", "Table 4."] {
        assert!(t.contains(table), "{table}");
    }
    assert!(t.contains("(not available)"), "no analysis was run");
    assert!(t.contains("lexical_social"));
    assert_eq!(fs::read_to_string(out.join("report.txt")).unwrap(), t);
}

#[test]
fn pipeline_config_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pipeline", "--print-config", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, text(&o)).unwrap();
    assert!(text(&o).contains("seed = 5\n"));

    let out = dir.path().join("failed");
    let mut args = vec![
        "pipeline",
        "--config",
        p(&cfg),
        "--set",
        "drivers=20",
        "--set",
        "train_ratio=0.9",
        "--set",
        "validation_ratio=0",
        "-o",
        p(&out),
    ];
    args.extend(TINY);
    let o = run(&args);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("train_lexical") && err.contains("precondition"),
        "{err}"
    );
    assert!(out.join(FAILED_MARKER).is_file());

    let out = dir.path().join("ok");
    let mut args = vec![
        "pipeline",
        "--config",
        p(&cfg),
        "--set",
        "drivers=20",
        "-o",
        p(&out),
    ];
    args.extend(TINY);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(text(&o).contains("Table 4."));
    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(m.command, "pipeline");
    assert!(!out.join(FAILED_MARKER).exists());
}
