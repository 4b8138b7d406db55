use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;
use tempfile::TempDir;

fn simulmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulmt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn simulmt")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = simulmt(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A copy-task corpus and a tiny model trained on it, shared by the tests
/// that only read them.
struct Fixture {
    _dir: TempDir,
    path: PathBuf,
}

fn fixture() -> &'static Path {
    static F: OnceLock<Fixture> = OnceLock::new();
    &F.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let p = dir.path();
        ok(
            p,
            &[
                "gen-synth",
                "--task",
                "copy",
                "--n",
                "300",
                "--vocab",
                "8",
                "--seed",
                "3",
                "--out-src",
                "tr.src",
                "--out-tgt",
                "tr.tgt",
                "--out-align",
                "tr.al",
            ],
        );
        ok(
            p,
            &[
                "gen-synth",
                "--task",
                "copy",
                "--n",
                "12",
                "--vocab",
                "8",
                "--seed",
                "4",
                "--out-src",
                "dev.src",
                "--out-tgt",
                "dev.tgt",
            ],
        );
        ok(
            p,
            &[
                "train",
                "--src",
                "tr.src",
                "--tgt",
                "tr.tgt",
                "--out",
                "m.ckpt",
                "--hidden-size",
                "16",
                "--embed-size",
                "16",
                "--epochs",
                "3",
                "--batch-size",
                "8",
            ],
        );
        Fixture {
            path: p.to_path_buf(),
            _dir: dir,
        }
    })
    .path
}

/// Copies the shared fixture files into a fresh directory.
fn workdir() -> TempDir {
    let dir = TempDir::new().unwrap();
    for f in ["tr.src", "tr.tgt", "tr.al", "dev.src", "dev.tgt", "m.ckpt"] {
        fs::copy(fixture().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn usage_errors_exit_2() {
    let d = workdir();
    let p = d.path();
    let cases: &[&[&str]] = &[
        &[],
        &["decode", "--model", "m.ckpt", "--output", "o.txt"],
        &[
            "stream-decode",
            "--model",
            "m.ckpt",
            "--input",
            "dev.src",
            "--output",
            "o",
            "--agent",
            "eager",
        ],
        &[
            "stream-decode",
            "--model",
            "m.ckpt",
            "--input",
            "dev.src",
            "--output",
            "o",
            "--agent",
            "static:0,1",
        ],
        &[
            "decode", "--model", "m.ckpt", "--input", "dev.src", "--output", "o", "--beam", "0",
        ],
        &[
            "tune",
            "--model",
            "m.ckpt",
            "--dev-src",
            "dev.src",
            "--dev-ref",
            "dev.tgt",
            "--grid-out",
            "g",
            "--s-range",
            "0..2",
        ],
        &[
            "tune",
            "--model",
            "m.ckpt",
            "--dev-src",
            "dev.src",
            "--dev-ref",
            "dev.tgt",
            "--grid-out",
            "g",
            "--rw-range",
            "3..1",
        ],
        &[
            "gen-synth",
            "--task",
            "sort",
            "--n",
            "3",
            "--out-src",
            "a",
            "--out-tgt",
            "b",
        ],
        &[
            "train",
            "--src",
            "tr.src",
            "--tgt",
            "tr.tgt",
            "--out",
            "x",
            "--init",
            "m.ckpt",
            "--hidden-size",
            "32",
        ],
        &[
            "train",
            "--src",
            "tr.src",
            "--tgt",
            "tr.tgt",
            "--out",
            "x",
            "--max-vocab",
            "2",
        ],
    ];
    for args in cases {
        assert_eq!(simulmt(p, args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_1() {
    let d = workdir();
    let p = d.path();
    fs::write(p.join("bad.ckpt"), b"not a checkpoint").unwrap();
    let cases: &[&[&str]] = &[
        &[
            "decode",
            "--model",
            "missing.ckpt",
            "--input",
            "dev.src",
            "--output",
            "o",
        ],
        &["decode", "--model", "bad.ckpt", "--input", "dev.src", "--output", "o"],
        &["decode", "--model", "m.ckpt", "--input", "missing.src", "--output", "o"],
    ];
    for args in cases {
        let out = simulmt(p, args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    assert!(!p.join("o").exists());
}

#[test]
fn wait_until_end_matches_offline_decode() {
    let d = workdir();
    let p = d.path();
    ok(
        p,
        &[
            "decode", "--model", "m.ckpt", "--input", "dev.src", "--output", "off.txt",
        ],
    );
    ok(
        p,
        &[
            "stream-decode",
            "--model",
            "m.ckpt",
            "--input",
            "dev.src",
            "--output",
            "wue.txt",
            "--agent",
            "wue",
            "--trace-out",
            "wue.trace",
        ],
    );
    let off = fs::read_to_string(p.join("off.txt")).unwrap();
    assert_eq!(off, fs::read_to_string(p.join("wue.txt")).unwrap());
    assert_eq!(off.lines().count(), 12);

    // Under WUE every mid-stream WRITE commits nothing.
    let trace = fs::read_to_string(p.join("wue.trace")).unwrap();
    let sentences: Vec<&str> = trace.split("\n\n").filter(|s| !s.trim().is_empty()).collect();
    assert_eq!(sentences.len(), 12);
    for s in sentences {
        let writes: Vec<&str> = s.lines().filter(|l| l.starts_with("WRITE")).collect();
        for w in &writes[..writes.len() - 1] {
            assert_eq!(w.split('\t').nth(2), Some("0"), "{w}");
        }
    }
}

#[test]
fn manifest_records_static_parameters() {
    let d = workdir();
    let p = d.path();
    ok(
        p,
        &[
            "stream-decode",
            "--model",
            "m.ckpt",
            "--input",
            "dev.src",
            "--output",
            "s.txt",
            "--agent",
            "static:5,2",
            "--manifest",
            "run.json",
        ],
    );
    assert!(!p.join("s.txt.manifest.json").exists());
    let m = manifest(&p.join("run.json"));
    assert_eq!(m["subcommand"], "stream-decode");
    assert_eq!(m["flags"]["agent"]["kind"], "static_rw");
    assert_eq!(m["flags"]["agent"]["s"], 5);
    assert_eq!(m["flags"]["agent"]["rw"], 2);
    assert_eq!(m["flags"]["beam"], 1);
    assert!(m["versions"]["simulmt"].is_string());
    assert!(m["duration_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn evaluate_reports_bleu_and_ap() {
    let d = workdir();
    let p = d.path();
    let stdout = ok(
        p,
        &[
            "evaluate",
            "--model",
            "m.ckpt",
            "--agent",
            "static:2,1",
            "--src",
            "dev.src",
            "--ref",
            "dev.tgt",
            "--output",
            "ev.json",
            "--sentences-out",
            "ev.tsv",
        ],
    );
    let printed: Value = serde_json::from_str(&stdout).unwrap();
    let written: Value = serde_json::from_str(&fs::read_to_string(p.join("ev.json")).unwrap()).unwrap();
    assert_eq!(printed, written);
    let bleu = written["bleu"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&bleu));
    let ap = written["ap"].as_f64().unwrap();
    assert!(ap > 0.0 && ap <= 1.0);
    let tsv = fs::read_to_string(p.join("ev.tsv")).unwrap();
    assert_eq!(tsv.lines().next(), Some("sentence\tbleu_smoothed\tap"));
    assert_eq!(tsv.lines().count(), 13);
}

#[test]
fn tune_writes_full_grid() {
    let d = workdir();
    let p = d.path();
    let stdout = ok(
        p,
        &[
            "tune",
            "--model",
            "m.ckpt",
            "--dev-src",
            "dev.src",
            "--dev-ref",
            "dev.tgt",
            "--s-range",
            "1..3",
            "--rw-range",
            "1,2",
            "--ap-max",
            "1.0",
            "--grid-out",
            "grid.tsv",
            "--jobs",
            "2",
        ],
    );
    let best: Value = serde_json::from_str(&stdout).unwrap();
    assert!(best["S"].as_u64().is_some() && best["RW"].as_u64().is_some());
    assert_eq!(fs::read_to_string(p.join("grid.tsv")).unwrap().lines().count(), 6);
    let grid: Value = serde_json::from_str(&fs::read_to_string(p.join("grid.json")).unwrap()).unwrap();
    assert_eq!(grid.as_array().unwrap().len(), 6);
    let m = manifest(&p.join("grid.tsv.manifest.json"));
    assert_eq!(m["results"]["best"], best);
}

#[test]
fn infeasible_tune_exits_3_and_keeps_grid() {
    let d = workdir();
    let p = d.path();
    let out = simulmt(
        p,
        &[
            "tune",
            "--model",
            "m.ckpt",
            "--dev-src",
            "dev.src",
            "--dev-ref",
            "dev.tgt",
            "--s-range",
            "1..2",
            "--rw-range",
            "1..2",
            "--ap-max",
            "0.01",
            "--grid-out",
            "grid.tsv",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_to_string(p.join("grid.tsv")).unwrap().lines().count(), 4);
    assert!(manifest(&p.join("grid.tsv.manifest.json"))["results"]["best"].is_null());
}

fn write_aligned(p: &Path, n: usize) {
    let toks: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let tgt: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let align: Vec<String> = (0..n).map(|i| format!("{i}-{i}")).collect();
    fs::write(p.join("x.src"), toks.join(" ") + "\n").unwrap();
    fs::write(p.join("x.tgt"), tgt.join(" ") + "\n").unwrap();
    fs::write(p.join("x.al"), align.join(" ") + "\n").unwrap();
}

#[test]
fn gen_chunks_splits_monotone_sentence() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write_aligned(p, 14);
    ok(
        p,
        &[
            "gen-chunks",
            "--src",
            "x.src",
            "--tgt",
            "x.tgt",
            "--align",
            "x.al",
            "--out-src",
            "c.src",
            "--out-tgt",
            "c.tgt",
        ],
    );
    let src = fs::read_to_string(p.join("c.src")).unwrap();
    let tgt = fs::read_to_string(p.join("c.tgt")).unwrap();
    assert_eq!(
        src.lines().collect::<Vec<_>>(),
        ["s0 s1 s2 s3 s4 s5", "s6 s7 s8 s9 s10 s11", "s12 s13"]
    );
    assert_eq!(
        tgt.lines().collect::<Vec<_>>(),
        ["t0 t1 t2 t3 t4 t5", "t6 t7 t8 t9 t10 t11", "t12 t13"]
    );
    let m = manifest(&p.join("c.src.manifest.json"));
    assert_eq!(m["flags"]["n"], 6);
    assert_eq!(m["results"]["pairs"], 3);
}

#[test]
fn gen_addm_uses_default_prefix_schedule() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write_aligned(p, 9);
    ok(
        p,
        &[
            "gen-addm",
            "--src",
            "x.src",
            "--tgt",
            "x.tgt",
            "--align",
            "x.al",
            "--out-src",
            "a.src",
            "--out-tgt",
            "a.tgt",
        ],
    );
    let src = fs::read_to_string(p.join("a.src")).unwrap();
    let lens: Vec<usize> = src.lines().map(|l| l.split_whitespace().count()).collect();
    assert_eq!(lens, [6, 7, 8, 9]);
    let tgt = fs::read_to_string(p.join("a.tgt")).unwrap();
    assert_eq!(tgt.lines().next(), Some("t0 t1 t2 t3 t4 t5"));
    let m = manifest(&p.join("a.src.manifest.json"));
    assert_eq!((m["flags"]["n"].clone(), m["flags"]["m"].clone()), (6.into(), 1.into()));
}

#[test]
fn gen_synth_is_deterministic_per_seed() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let gen = |seed: &str, out: &str| {
        ok(
            p,
            &[
                "gen-synth",
                "--task",
                "reverse",
                "--n",
                "40",
                "--seed",
                seed,
                "--out-src",
                &format!("{out}.src"),
                "--out-tgt",
                &format!("{out}.tgt"),
            ],
        );
        (
            fs::read_to_string(p.join(format!("{out}.src"))).unwrap(),
            fs::read_to_string(p.join(format!("{out}.tgt"))).unwrap(),
        )
    };
    let a = gen("7", "a");
    assert_eq!(a, gen("7", "b"));
    assert_ne!(a, gen("8", "c"));
    for (s, t) in a.0.lines().zip(a.1.lines()) {
        let mut rev: Vec<&str> = s.split_whitespace().collect();
        rev.reverse();
        assert_eq!(rev.join(" "), t);
    }
    assert_eq!(manifest(&p.join("a.src.manifest.json"))["seeds"]["corpus"], 7);
}

#[test]
fn paper_preset_keeps_schedule_values() {
    let d = workdir();
    let p = d.path();
    fs::write(p.join("s.src"), "a b\nb a\n").unwrap();
    fs::write(p.join("s.tgt"), "b a\na b\n").unwrap();
    ok(
        p,
        &[
            "train",
            "--config",
            "paper",
            "--src",
            "s.src",
            "--tgt",
            "s.tgt",
            "--out",
            "p.ckpt",
            "--hidden-size",
            "4",
            "--embed-size",
            "4",
            "--batch-size",
            "2",
        ],
    );
    let m = manifest(&p.join("p.ckpt.manifest.json"));
    let c = &m["results"]["config"];
    assert_eq!(c["learning_rate"], 1.0);
    assert_eq!(c["decay_rate"], 0.5);
    assert_eq!(c["dropout"], 0.3);
    assert_eq!(c["epochs"], 13);
    assert_eq!(c["start_decay_after"], 8);
    assert_eq!(c["clip_norm"], 5.0);
    assert_eq!(m["results"]["epoch_loss"].as_array().unwrap().len(), 13);
    assert_eq!(m["flags"]["config"], "paper");
    assert_eq!(m["flags"]["manifest"], Value::Null);
}

#[test]
fn fine_tuning_defaults_and_reload() {
    let d = workdir();
    let p = d.path();
    ok(
        p,
        &[
            "train", "--src", "tr.src", "--tgt", "tr.tgt", "--out", "ft.ckpt", "--init", "m.ckpt", "--epochs", "1",
        ],
    );
    let c = &manifest(&p.join("ft.ckpt.manifest.json"))["results"]["config"];
    assert_eq!(c["learning_rate"], 0.1);
    assert_eq!(c["hidden_size"], 16);
    assert_eq!(c["epochs"], 1);
    ok(
        p,
        &[
            "decode", "--model", "ft.ckpt", "--input", "dev.src", "--output", "o.txt", "--beam", "3",
        ],
    );
    assert_eq!(fs::read_to_string(p.join("o.txt")).unwrap().lines().count(), 12);
}
