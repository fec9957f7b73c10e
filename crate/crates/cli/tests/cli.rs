use std::fs;
use std::process::{Command, Output};

fn setmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setmem")).args(args).output().unwrap()
}

#[test]
fn codes_to_stdout() {
    let out = setmem(&["codes"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 34);
    assert!(lines.iter().all(|l| l.split(',').count() == 32));
    assert!(lines[1..].iter().all(|l| l.split(',').skip(1).all(|c| c == "1" || c == "-1")));
}

#[test]
fn unsupported_degree_is_config_error() {
    let out = setmem(&["codes", "--degree", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_or_subcommand_prints_usage() {
    for args in [&["sinr", "--bogus"][..], &["fly"][..], &[][..]] {
        let out = setmem(args);
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    for body in ["runs = 0\n", "not_a_key = 1\n", "beta = 2.5\n", "runs = [\n", "scenario = \"ber-vs-snr\"\n"] {
        fs::write(&cfg, body).unwrap();
        let out = setmem(&["sinr", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = setmem(&["sinr", "--algo", "sm-lms", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = setmem(&["sinr", "--config", "/nonexistent/x.toml"]);
    assert!(!out.status.success());
}

#[test]
fn sinr_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "packet_length = 250\n").unwrap();
    let out_dir = dir.path().join("out");
    let args = [
        "sinr",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "42",
        "--runs",
        "2",
        "--algo",
        "nlms,sm-nlms-pidb",
        "--out",
        out_dir.to_str().unwrap(),
    ];
    let out = setmem(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sinr = fs::read_to_string(out_dir.join("sinr.csv")).unwrap();
    assert!(sinr.starts_with("iteration,algorithm,mean_sinr_db\n"));
    assert_eq!(sinr.lines().count(), 1 + 2 * 250);
    let manifest = fs::read_to_string(out_dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 42"));
    assert!(manifest.contains("runs = 2"));
    assert!(manifest.contains("\"sm-nlms-pidb\""));

    // same arguments, same bytes
    let again = dir.path().join("again");
    let mut args2 = args;
    args2[10] = again.to_str().unwrap();
    assert!(setmem(&args2).status.success());
    for name in ["sinr.csv", "summary.csv", "manifest.toml"] {
        assert_eq!(fs::read(out_dir.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn bounds_report_prints_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = setmem(&["bounds-report", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["lambda_max", "mu_h range", "mu_A range", "beta range"] {
        assert!(text.contains(key), "{text}");
    }
    assert!(dir.path().join("stability.csv").exists());
}

#[test]
fn diverging_estimator_is_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("div.toml");
    fs::write(&cfg, "mu_h_fraction = 8.0\nruns = 2\n").unwrap();
    let out = setmem(&["sinr", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn set_overrides_any_key() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = setmem(&[
        "track-interference",
        "--set",
        "packet_length=220",
        "--set",
        "users=4",
        "--runs",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(out_dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("packet_length = 220") && manifest.contains("users = 4"));
    assert_eq!(fs::read_to_string(out_dir.join("interference.csv")).unwrap().lines().count(), 221);
    let out = setmem(&["sinr", "--set", "bogus=1", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
