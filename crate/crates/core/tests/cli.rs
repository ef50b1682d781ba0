use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ethlab(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ethlab"));
    cmd.args(args).env_remove("ETHLAB_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("ETHLAB_OUT_DIR", dir);
    }
    cmd.output().expect("spawn ethlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn localize_reports_pauli_dimension() {
    let o = ethlab(&["localize", "--pauli", "XIZ"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d_o"], 2);
    assert_eq!(v["total_dim"], 8);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[chain]\nL = 6\nbogus = 1\n");
    let o = ethlab(&["--config", &cfg, "spin-chain"], Some(dir.path()));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn negative_bin_width_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[binning]\nomega_bin_width = -0.1\n");
    let o = ethlab(&["--config", &cfg, "spin-chain", "-L", "6", "--la", "2"], Some(dir.path()));
    assert_eq!(code(&o), 2);
}

#[test]
fn rejected_computation_exits_3() {
    let o = ethlab(&["localize", "--pauli", "XYZ"], None);
    assert_eq!(code(&o), 3);
    let o = ethlab(&["localize", "--pauli", "XQ"], None);
    assert_eq!(code(&o), 3);
}

#[test]
fn forbidden_cache_miss_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = ethlab(
        &["--cache", "forbid", "spin-chain", "-L", "6", "--la", "2"],
        Some(dir.path()),
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn output_directory_follows_environment_then_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let o = ethlab(&["spin-chain", "-L", "6", "--la", "2"], Some(env_dir.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.path().join("spin_chain.json").exists());

    let flag_dir = tempfile::tempdir().unwrap();
    let flag = flag_dir.path().to_string_lossy().into_owned();
    let o = ethlab(
        &["--out", &flag, "--cache", "use", "spin-chain", "-L", "6", "--la", "2"],
        Some(env_dir.path()),
    );
    assert_eq!(code(&o), 0);
    assert!(flag_dir.path().join("spin_chain.json").exists());
}

#[test]
fn cache_is_reused_after_first_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spin-chain", "-L", "6", "--la", "2"];
    assert_eq!(code(&ethlab(&args, Some(dir.path()))), 0);
    let mut forbid = vec!["--cache", "forbid"];
    forbid.extend(args);
    let o = ethlab(&forbid, Some(dir.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn predict_writes_prediction_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[chain]\nL = 6\nL_A = 2\n");
    let o = ethlab(
        &["--config", &cfg, "predict", "--models", "exp_decay_flat_A", "--sigma-s", "0.5", "--omega-max", "1"],
        Some(dir.path()),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"], 21);
    assert!(Path::new(v["file"].as_str().unwrap()).exists());
}
