use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SPEC: &str = r#"{
  "n_samples": 240,
  "band_names": ["green", "red", "nir"],
  "class0_mean": [0.08, 0.05, 0.40],
  "class1_mean": [0.09, 0.12, 0.18],
  "within_class_scale": 0.05,
  "gain_min": 0.5,
  "gain_max": 2.0,
  "seed": 3
}"#;

const QUICK: [&str; 8] = ["--epochs", "4", "--patience", "4", "--folds", "5", "--batch", "16"];

fn ndlayer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndlayer"))
        .args(args)
        .env_remove("ND_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = ndlayer(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn spec_file(dir: &Path) -> PathBuf {
    let path = dir.join("spec.json");
    fs::write(&path, SPEC).unwrap();
    path
}

fn only_subdir(dir: &Path) -> PathBuf {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    entries.pop().unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_header_plus_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SPEC.replace("240", "100")).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["synth", "--synth", s(&spec), "--out", s(&a)]);
    ok(&["synth", "--synth", s(&spec), "--out", s(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert_eq!(text.lines().next().unwrap(), "green,red,nir,label");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    ok(&["synth", "--synth", s(&spec), "--out", s(&b), "--seed", "4"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn invalid_spec_fails_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SPEC.replace("\"gain_min\": 0.5", "\"gain_min\": 5.0")).unwrap();
    let out = ndlayer(&["synth", "--synth", s(&spec), "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[") && err.contains("gain_min"), "{err}");
}

#[test]
fn bad_csv_reports_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "a,b,label\n0.1,0.2,0\n0.3,0.4,2\n").unwrap();
    let out = ndlayer(&["crossval", "--data", s(&csv), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[csv]:") && err.contains("row 2"), "{err}");
}

#[test]
fn gradcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let text = ok(&["gradcheck", "--arch", "nd", "--depth", "3", "--trials", "500", "--tol", "1e-4", "--out", s(out)]);
    assert!(text.contains("PASS"), "{text}");
    let run = only_subdir(out);
    assert!(run.file_name().unwrap().to_str().unwrap().starts_with("gradcheck-"));
    assert!(fs::read_dir(&run).unwrap().count() > 0);

    let strict = ndlayer(&["gradcheck", "--arch", "nd", "--depth", "3", "--trials", "5", "--tol", "0", "--out", s(out)]);
    assert_eq!(strict.status.code(), Some(1));

    let layer = ok(&["gradcheck", "--layer", "smooth-abs", "--trials", "50", "--tol", "1e-5", "--out", s(out)]);
    assert!(layer.contains("PASS"), "{layer}");

    let usage = ndlayer(&["gradcheck", "--arch", "unknown"]);
    assert_eq!(usage.status.code(), Some(2));
    let err = String::from_utf8(usage.stderr).unwrap();
    assert!(err.lines().next().unwrap().starts_with("error[usage]:"), "{err}");
}

#[test]
fn missing_data_source_is_a_usage_error() {
    let out = ndlayer(&["crossval"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ndlayer(&["crossval", "--data", "a.csv", "--synth", "b.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crossval_grid_emits_a_report_per_model_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let run = |out: &Path| {
        let mut args = vec!["crossval", "--synth", s(&spec), "--arch", "all", "--depth", "all", "--out", s(out)];
        args.extend(QUICK);
        ok(&args);
        only_subdir(out)
    };
    let out_a = dir.path().join("a");
    let first = run(&out_a);
    let groups = ["nd", "mlp", "attnd"]
        .iter()
        .flat_map(|a| (2..=4).map(move |d| format!("{a}-d{d}")))
        .collect::<Vec<_>>();
    for g in &groups {
        let report: Value = serde_json::from_str(&fs::read_to_string(first.join(g).join("report.json")).unwrap()).unwrap();
        assert_eq!(report["report"]["folds"].as_array().unwrap().len(), 5, "{g}");
        assert!(first.join(g).join("checkpoints/fold-4.json").exists());
        assert!(first.join(g).join("sweep.csv").exists());
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(first.join("nd-d2/report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["param_count"], count_nd2(3));
    assert_eq!(report["meta"]["seed"], 0);

    // a second run into a fresh directory with identical arguments writes identical files
    let second = dir.path().join("a-again");
    fs::rename(&first, &second).unwrap();
    let third = run(&out_a);
    for g in &groups {
        for f in ["report.json", "sweep.csv", "checkpoints/fold-0.json"] {
            assert_eq!(
                fs::read(second.join(g).join(f)).unwrap(),
                fs::read(third.join(g).join(f)).unwrap(),
                "{g}/{f}"
            );
        }
    }
}

// two coefficients per band pair, then one dense unit over the pairs
fn count_nd2(n: u64) -> u64 {
    let pairs = n * (n - 1) / 2;
    2 * pairs + pairs + 1
}

#[test]
fn noise_sweep_matches_crossval_clean_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let cv_out = dir.path().join("cv");
    let mut args = vec!["crossval", "--synth", s(&spec), "--arch", "nd,mlp", "--out", s(&cv_out)];
    args.extend(QUICK);
    ok(&args);
    let run = only_subdir(&cv_out);
    let ckpts: Vec<PathBuf> = ["nd-d2", "mlp-d2"].iter().map(|g| run.join(g).join("checkpoints/fold-1.json")).collect();
    let list = format!("{},{}", s(&ckpts[0]), s(&ckpts[1]));
    let noise_out = dir.path().join("noise");
    ok(&[
        "noise",
        "--checkpoint",
        &list,
        "--synth",
        s(&spec),
        "--etas",
        "0,0.02,0.04,0.06,0.08,0.1",
        "--out",
        s(&noise_out),
    ]);
    let rows = data_rows(&fs::read_to_string(only_subdir(&noise_out).join("sweep.csv")).unwrap());
    assert_eq!(rows.len(), 12);
    for (arch, group) in [("nd", "nd-d2"), ("mlp", "mlp-d2")] {
        let mine: Vec<&Vec<String>> = rows.iter().filter(|r| r[3] == arch).collect();
        assert_eq!(mine.len(), 6);
        let report: Value = serde_json::from_str(&fs::read_to_string(run.join(group).join("report.json")).unwrap()).unwrap();
        let fold = &report["report"]["folds"][1];
        assert_eq!(fold["fold"], 1);
        let clean: f64 = mine[0][1].parse().unwrap();
        assert_eq!(mine[0][0], "0");
        assert_eq!(clean, fold["test_accuracy_pct"].as_f64().unwrap());
        // the sweep reproduces the crossval noise curve point for point
        for (row, point) in mine.iter().zip(fold["noise"].as_array().unwrap()) {
            assert_eq!(row[1].parse::<f64>().unwrap(), point["accuracy_pct"].as_f64().unwrap());
        }
    }
}

#[test]
fn coeffs_on_untrained_trained_and_dense_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let train_out = dir.path().join("train");
    let mut args = vec!["train", "--synth", s(&spec), "--out", s(&train_out)];
    args.extend(QUICK);
    ok(&args);
    let run = only_subdir(&train_out);

    let out = dir.path().join("coeffs-init");
    ok(&["coeffs", "--checkpoint", s(&run.join("checkpoint-init.json")), "--topk", "10", "--out", s(&out)]);
    let cdir = only_subdir(&out);
    let ratios = data_rows(&fs::read_to_string(cdir.join("ratios.csv")).unwrap());
    assert_eq!(ratios.len(), 3);
    for row in &ratios {
        assert!(row[1..].iter().all(|v| v.parse::<f64>().unwrap() == 1.0), "{row:?}");
    }
    // topk beyond the 3 available pairs lists them all
    let top = data_rows(&fs::read_to_string(cdir.join("top.csv")).unwrap());
    assert_eq!(top.len(), 3);

    let out = dir.path().join("coeffs-trained");
    ok(&["coeffs", "--checkpoint", s(&run.join("checkpoint.json")), "--topk", "2", "--out", s(&out)]);
    let top = data_rows(&fs::read_to_string(only_subdir(&out).join("top.csv")).unwrap());
    assert_eq!(top.len(), 2);
    let asym: Vec<f64> = top.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(asym[0] >= asym[1] && asym[1] >= 1.0);

    let mlp_out = dir.path().join("mlp");
    let mut args = vec!["train", "--synth", s(&spec), "--arch", "mlp", "--out", s(&mlp_out)];
    args.extend(QUICK);
    ok(&args);
    let mlp = only_subdir(&mlp_out).join("checkpoint.json");
    let failed = ndlayer(&["coeffs", "--checkpoint", s(&mlp), "--out", s(dir.path())]);
    assert_eq!(failed.status.code(), Some(1));
    let err = String::from_utf8(failed.stderr).unwrap();
    assert!(err.starts_with("error[") && err.contains("checkpoint.json"), "{err}");
}

#[test]
fn thread_count_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let mut args = vec!["crossval", "--synth", s(&spec), "--out", s(dir.path())];
    args.extend(QUICK);
    let out = Command::new(env!("CARGO_BIN_EXE_ndlayer")).args(&args).env("ND_THREADS", "zero").output().unwrap();
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("ND_THREADS"));
    let out = Command::new(env!("CARGO_BIN_EXE_ndlayer")).args(&args).env("ND_THREADS", "2").output().unwrap();
    assert!(out.status.success());
}
