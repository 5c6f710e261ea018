use std::path::Path;
use std::process::{Command, Output};

use qrc_core::cli::verify_manifest;

fn qrc(args: &[&str], env: Option<(&str, &Path)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qrc"));
    cmd.args(args).env_remove("QRC_OUT_DIR");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn lle_prints_the_exponent_and_records_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lle");
    let o = qrc(&["lle", "--r", "4", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("lambda* = 0.693"), "{}", text(&o.stdout));
    assert!(verify_manifest(&out.join("manifest.json")).unwrap().is_empty());
    std::fs::write(out.join("lle.csv"), "tampered\n").unwrap();
    assert_eq!(verify_manifest(&out.join("manifest.json")).unwrap(), vec!["lle.csv".to_string()]);
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrc(&["generate", "--map", "henon"], Some(("QRC_OUT_DIR", dir.path())));
    assert!(o.status.success(), "{}", text(&o.stderr));
    for f in ["train.csv", "test.csv", "scale.csv", "manifest.json"] {
        assert!(dir.path().join("generate").join(f).exists(), "{f}");
    }
    let train = std::fs::read_to_string(dir.path().join("generate/train.csv")).unwrap();
    assert!(train.starts_with("series,t,x,y\n"));
    assert_eq!(train.lines().count(), 1 + 100 * 20);
}

#[test]
fn usage_errors_exit_one() {
    let o = qrc(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("Usage"));
    assert_eq!(qrc(&["lle", "--r", "4.5"], None).status.code(), Some(1));
    assert_eq!(qrc(&["predict"], None).status.code(), Some(1));
    assert_eq!(qrc(&["lle", "--threads", "0"], None).status.code(), Some(1));
    assert_eq!(qrc(&["--help"], None).status.code(), Some(0));
}

#[test]
fn config_errors_carry_file_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "tau = 0.5\nlayrs = 2\n").unwrap();
    let o = qrc(&["lle", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("bad.toml:2:1"), "{err}");
}

#[test]
fn predict_rejects_a_model_of_the_wrong_shape() {
    let dir = tempfile::tempdir().unwrap();
    let train_dir = dir.path().join("train");
    let o = qrc(&["train", "--out", train_dir.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let model = train_dir.join("model.txt");
    let o = qrc(
        &["predict", "--map", "henon", "--model", model.to_str().unwrap(), "--out", dir.path().join("p").to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("model is 1x"), "{}", text(&o.stderr));
    let o = qrc(&["predict", "--model", model.to_str().unwrap(), "--out", dir.path().join("q").to_str().unwrap()], None);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("q/manifest.json")).unwrap();
    assert!(manifest.contains("model.txt"));
}
