use std::fs;
use std::path::Path;
use std::process::Command;

use pauc::cli::{run, ModelArtifact, ReportArtifact, EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn pauc(args: &[&str]) -> i32 {
    run(std::iter::once("pauc").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str) -> std::path::PathBuf {
    let data = dir.join("data.csv");
    assert_eq!(pauc(&["synth", "--out", s(&data), "--n-pos", "40", "--n-neg", "200", "--seed", seed]), EXIT_OK);
    data
}

fn write_config(dir: &Path, data: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"seed": 4, "data.path": {:?}, "scorer.family": "mlp", "scorer.hidden": [6], "train.max_epochs": 30{extra}}}"#,
        s(data)
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn synth_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "1");
    let ds = pauc::dataset::load_csv(&data, "label", "1").unwrap();
    assert_eq!(ds, pauc::dataset::synth_xor_gmm(40, 200, 0.5, 1).unwrap());
}

#[test]
fn train_then_eval_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let config = write_config(dir.path(), &data, "");
    let out = dir.path().join("out");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        if out.exists() {
            fs::remove_dir_all(&out).unwrap();
        }
        assert_eq!(pauc(&["train", "--config", s(&config), "--out-dir", s(&out)]), EXIT_OK);
        let model = out.join("model.json");
        assert_eq!(pauc(&["eval", "--model", s(&model), "--data", s(&data)]), EXIT_OK);
        outputs.push(["model.json", "report.json", "report.txt"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let model: ModelArtifact = serde_json::from_slice(&outputs[0][0]).unwrap();
    let report: ReportArtifact = serde_json::from_slice(&outputs[0][1]).unwrap();
    assert_eq!(model.config_hash.len(), 64);
    assert_eq!(report.config_hash, model.config_hash);
    assert_eq!(model.seed, 4);
    assert!(String::from_utf8_lossy(&outputs[0][2]).contains(&model.config_hash));
}

#[test]
fn eval_writes_only_into_its_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "3");
    let config = write_config(dir.path(), &data, "");
    let train_dir = dir.path().join("train");
    assert_eq!(pauc(&["train", "--config", s(&config), "--out-dir", s(&train_dir)]), EXIT_OK);
    let eval_dir = dir.path().join("eval");
    let model = train_dir.join("model.json");
    assert_eq!(pauc(&["eval", "--model", s(&model), "--data", s(&data), "--out-dir", s(&eval_dir)]), EXIT_OK);
    let mut names: Vec<_> = fs::read_dir(&eval_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["report.json", "report.txt"]);
    assert_eq!(fs::read_dir(&train_dir).unwrap().count(), 1);
}

#[test]
fn roc_and_cv_embed_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "5");
    let config = write_config(dir.path(), &data, r#", "cv.k": 3, "cv.preset": "custom", "cv.layers": [1], "cv.widths": [2, 6], "cv.activations": ["tanh"], "cv.l1": [0.0]"#);
    let out = dir.path().join("out");
    assert_eq!(pauc(&["train", "--config", s(&config), "--out-dir", s(&out)]), EXIT_OK);
    let model: ModelArtifact = serde_json::from_slice(&fs::read(out.join("model.json")).unwrap()).unwrap();

    let roc = out.join("roc.csv");
    assert_eq!(pauc(&["roc", "--model", s(&out.join("model.json")), "--data", s(&data), "--out", s(&roc)]), EXIT_OK);
    let text = fs::read_to_string(&roc).unwrap();
    assert!(text.starts_with(&format!("# config_hash={}\n", model.config_hash)));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "fpr,tpr");
    assert_eq!(rows[1], "0,0");
    assert_eq!(*rows.last().unwrap(), "1,1");

    let cv_dir = dir.path().join("cv");
    assert_eq!(pauc(&["cv", "--config", s(&config), "--out-dir", s(&cv_dir)]), EXIT_OK);
    let csv = fs::read_to_string(cv_dir.join("cv.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("# config_hash="));
    assert_eq!(csv.lines().filter(|l| l.starts_with("mlp,")).count(), 2);
    assert!(cv_dir.join("cv.json").is_file());
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "6");
    let config = write_config(dir.path(), &data, "");
    let out = dir.path().join("out");
    let c = s(&config);
    let o = s(&out);
    assert_eq!(pauc(&["train", "--config", c, "--out-dir", o, "--set", "train.beta=0"]), EXIT_USAGE);
    assert_eq!(pauc(&["train", "--config", c, "--out-dir", o, "--set", "train.bogus=1"]), EXIT_USAGE);
    assert_eq!(pauc(&["train", "--config", c, "--out-dir", o, "--set", "data.path=\"/nonexistent.csv\""]), EXIT_DATA);
    assert_eq!(pauc(&["eval", "--model", "/nonexistent/model.json", "--data", s(&data)]), EXIT_DATA);
    assert_eq!(pauc(&["frobnicate"]), EXIT_USAGE);
    assert!(!out.exists());
}

#[test]
fn binary_reports_invalid_range() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "7");
    let config = write_config(dir.path(), &data, r#", "train.beta": 0.0"#);
    let output = Command::new(env!("CARGO_BIN_EXE_pauc"))
        .args(["train", "--config", s(&config), "--out-dir", s(&dir.path().join("o"))])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&output.stderr).contains("0 <= alpha < beta <= 1"));
}
