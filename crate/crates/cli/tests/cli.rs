use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn celm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_celm")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = celm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(celm(&["--help"]).status.code(), Some(0));
    assert_eq!(celm(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(celm(&["run", "--dataset", "haberman", "--hidden", "0"]).status.code(), Some(1));
    let data = data_dir();
    let out = celm(&["run", "--dataset", "no_such_set", "--data-dir", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plain_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_dir();
    let reports = dir.path().join("r");
    let stdout = ok(&[
        "run",
        "--dataset",
        "haberman",
        "--data-dir",
        data.to_str().unwrap(),
        "--variants",
        "plain_chaotic,plain_traditional",
        "--seeds",
        "0-2",
        "--report-dir",
        reports.to_str().unwrap(),
    ]);
    assert!(stdout.contains("Hidden Nodes"));
    assert!(reports.join("haberman.md").exists());
    assert!(reports.join("haberman.csv").exists());
}

#[test]
fn two_party_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let work = dir.path().to_str().unwrap();
    let data = data_dir();
    ok(&["owner", "keygen", "--work", work, "--ckks-profile", "test", "--seed", "4"]);
    ok(&["owner", "encrypt", "--work", work, "--dataset", "haberman", "--data-dir", data.to_str().unwrap(), "--hidden", "1"]);
    ok(&["evaluator", "hidden", "--work", work]);
    ok(&["owner", "fit", "--work", work]);
    // the evaluator must work with the secret key out of reach
    std::fs::rename(dir.path().join("secret.key"), dir.path().join("held_by_owner")).unwrap();
    ok(&["evaluator", "predict", "--work", work]);
    std::fs::rename(dir.path().join("held_by_owner"), dir.path().join("secret.key")).unwrap();
    let line = ok(&["owner", "decrypt", "--work", work]);
    let acc: f64 = line.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((0.5..=1.0).contains(&acc), "{line}");
}
