use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lie-eqgnn"));
    c.env("LIE_EQGNN_THREADS", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, n_per_class: usize, seed: u64) -> PathBuf {
    let out = dir.join(name);
    ok(&["synth-data", "--out", p(&out), "--n-per-class", &n_per_class.to_string(), "--seed", &seed.to_string()]);
    out
}

fn small_train(dir: &Path, data: &Path, out: &str, extra: &[&str]) -> PathBuf {
    let out_dir = dir.join(out);
    let mut args = vec![
        "train",
        "--data",
        p(data),
        "--out-dir",
        p(&out_dir),
        "--epochs",
        "3",
        "--warmup-epochs",
        "1",
        "--batch-size",
        "8",
        "--no-wall-clock",
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out_dir
}

#[test]
fn synth_data_is_deterministic_and_loadable() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "a.jsonl", 10, 7);
    let b = synth(dir.path(), "b.jsonl", 10, 7);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 20);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let label = v["label"].as_u64().unwrap();
        assert!(label <= 1);
        for part in v["particles"].as_array().unwrap() {
            assert_eq!(part.as_array().unwrap().len(), 4);
        }
    }
}

#[test]
fn train_writes_metrics_checkpoint_and_config() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "d.jsonl", 20, 1);
    let out = small_train(dir.path(), &data, "run", &[]);
    for f in ["metrics.csv", "checkpoint.bin", "config.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next().unwrap(), "epoch,train_loss,val_loss,train_acc,val_acc,lr,seconds");
    assert_eq!(lines.count(), 3);
    let cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert!(cfg.is_object());

    let eval = ok(&["eval", "--checkpoint", p(&out.join("checkpoint.bin")), "--data", p(&data)]);
    assert!(eval.contains("accuracy"), "{eval}");
    let eq = ok(&["equivariance-test", "--checkpoint", p(&out.join("checkpoint.bin")), "--trials", "10"]);
    assert!(eq.contains("max logit deviation"), "{eq}");
}

#[test]
fn identical_runs_and_resumed_runs_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "d.jsonl", 15, 2);
    let a = small_train(dir.path(), &data, "a", &["--seed", "4"]);
    let b = small_train(dir.path(), &data, "b", &["--seed", "4"]);
    let partial = small_train(dir.path(), &data, "c", &["--seed", "4", "--stop-after", "1"]);
    let ck = partial.join("checkpoint.bin");
    let resumed = small_train(dir.path(), &data, "c", &["--seed", "4", "--resume", p(&ck)]);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "metrics.csv"), read(&b, "metrics.csv"));
    assert_eq!(read(&a, "metrics.csv"), read(&resumed, "metrics.csv"));
    assert_eq!(read(&a, "checkpoint.bin"), read(&resumed, "checkpoint.bin"));
}

#[test]
fn unknown_variant_lists_the_valid_ones() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "d.jsonl", 10, 0);
    let o = run(&["train", "--data", p(&data), "--out-dir", p(&dir.path().join("x")), "--variant", "phi_q"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for v in ["classical", "phi_e", "phi_x", "phi_h", "phi_m", "full_quantum"] {
        assert!(err.contains(v), "{err}");
    }
}

#[test]
fn param_count_reports_angles_and_reference_totals() {
    let out = ok(&["param-count"]);
    for total in ["668", "998", "1100", "1090", "592", "1088"] {
        assert!(out.contains(total), "{total} missing:\n{out}");
    }
    let angle_lines: Vec<&str> = out.lines().filter(|l| l.contains("circuit angles")).collect();
    assert!(!angle_lines.is_empty());
    assert!(angle_lines.iter().all(|l| l.trim_end().ends_with("12 circuit angles")));
    let json: serde_json::Value = serde_json::from_str(&ok(&["param-count", "--variant", "phi_m", "--json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 1);
}

#[test]
fn plot_emits_well_formed_svg() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "d.jsonl", 10, 3);
    let run_dir = small_train(dir.path(), &data, "run", &[]);
    let svg = dir.path().join("curves.svg");
    ok(&["plot", "--metrics", p(&run_dir.join("metrics.csv")), "--out", p(&svg)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(polylines, 4);
}

#[test]
fn grad_check_passes_on_a_quantum_variant() {
    let out = ok(&["grad-check", "--variant", "phi_m", "--n-params", "6", "--batch", "2"]);
    assert!(out.contains("checked 6 parameters"), "{out}");
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["train"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));

    let missing = dir.path().join("missing.jsonl");
    let o = run(&["train", "--data", p(&missing), "--out-dir", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let garbage = dir.path().join("bad.jsonl");
    std::fs::write(&garbage, "{\"label\": 0, \"particles\": [[1, 2]]}\n").unwrap();
    assert_eq!(run(&["eval", "--checkpoint", p(&garbage), "--data", p(&garbage)]).status.code(), Some(2));

    let data = synth(dir.path(), "d.jsonl", 10, 0);
    let run_dir = small_train(dir.path(), &data, "run", &[]);
    let ck = run_dir.join("checkpoint.bin");
    let o = run(&["equivariance-test", "--checkpoint", p(&ck), "--trials", "5", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));

    let mut corrupt = std::fs::read(&ck).unwrap();
    let mid = corrupt.len() / 2;
    corrupt[mid] ^= 0xff;
    let bad_ck = dir.path().join("corrupt.bin");
    std::fs::write(&bad_ck, corrupt).unwrap();
    assert_eq!(run(&["eval", "--checkpoint", p(&bad_ck), "--data", p(&data)]).status.code(), Some(2));

    let o = bin().env("LIE_EQGNN_THREADS", "zero").args(["param-count"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
