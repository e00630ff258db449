use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itinerant"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

fn short_linear(horizon: f64) -> String {
    format!(
        "[run]\nhorizon = {horizon}\n\n[plant]\nnoise = \"zero\"\n\n[signals]\nclasses = [\"linear\"]\n\n\
         [truth]\nclass = 1\ntheta = 1.2\n\n[prototype]\ndelta = 0.0\n\n[decision]\nsettle = 5.0\n"
    )
}

#[test]
fn tune_on_shipped_config_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["tune"], &shipped("three_class.toml"), tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("tuning.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "tune");
    assert_eq!(json["classes"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run\nhorizon = ");
    assert_eq!(run(&["tune"], &cfg, tmp.path()).status.code(), Some(1));
    let cfg = write_config(tmp.path(), "[run]\nhorizn = 3.0\n");
    assert_eq!(run(&["tune"], &cfg, tmp.path()).status.code(), Some(1));
}

#[test]
fn gain_above_limit_is_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[prototype]\ngamma = 1.0\n");
    let o = run(&["tune"], &cfg, tmp.path());
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn zero_horizon_never_enters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "{}\n[analysis]\nbound = 1e-6\n",
            short_linear(0.0).replace("settle = 5.0", "settle = 0.0")
        ),
    );
    let o = run(&["simulate"], &cfg, tmp.path());
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &short_linear(20.0).replace("noise = \"zero\"", "noise = \"uniform\""),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&["simulate"], &cfg, &a);
    run(&["simulate"], &cfg, &b);
    let csv_a = fs::read(a.join("trajectory.csv")).unwrap();
    assert!(!csv_a.is_empty());
    assert_eq!(csv_a, fs::read(b.join("trajectory.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("convergence.json")).unwrap(),
        fs::read(b.join("convergence.json")).unwrap()
    );

    let c = tmp.path().join("c");
    run(&["simulate", "--seed", "8"], &cfg, &c);
    assert_ne!(csv_a, fs::read(c.join("trajectory.csv")).unwrap());
}

#[test]
fn config_hash_is_embedded_in_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &short_linear(20.0));
    run(&["simulate"], &cfg, tmp.path());
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("convergence.json")).unwrap()).unwrap();
    let hash = json["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .contains(&format!("config_hash={hash}")));
}

#[test]
fn parameter_free_class_with_explicit_gain_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[signals]\nclasses = [{ family = \"constant\", value = 0.3 }, \"linear\"]\n\n\
         [truth]\nclass = 2\n\n[prototype]\ngamma = 0.01\n",
    );
    let o = run(&["tune"], &cfg, tmp.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("tuning.json")).unwrap()).unwrap();
    let warnings = json["classes"][0]["warnings"].to_string();
    assert!(warnings.contains("does not enter the signal"), "{warnings}");
}

#[test]
fn missing_dataset_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[rnn]\nn_units = [10]\ndataset = \"no_such_file.csv\"\n",
    );
    assert_eq!(run(&["fit-rnn"], &cfg, tmp.path()).status.code(), Some(1));
}

#[test]
fn excitation_check_fails_under_large_disturbance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[plant]\nnoise_bound = 1.0\n");
    let o = run(&["verify", "pe"], &cfg, tmp.path());
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("verify_pe.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], false);
}

#[test]
fn unknown_subcommand_exits_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_itinerant"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
