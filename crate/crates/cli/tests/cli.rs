//! End-to-end checks of the binary: exit codes and output files.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavlat"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("cavlat-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn report_runs_on_apparatus_config() {
    let out = bin()
        .args(["report", "--config"])
        .arg(config("apparatus.cfg"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("optical density"));
    assert!(text.contains("lattice shift"));
}

#[test]
fn spectrum_writes_grid_csv() {
    let path = tmp("spectrum.csv");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(config("low_od_linear.cfg"))
        .args(["--model", "tmm", "--threads", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header, "delta_c,delta_lat,T,R,A");
    // provenance preamble parses back as a config
    assert!(text.lines().take_while(|l| l.starts_with('#')).count() > 10);
    // grid rows: 400 x 100 points
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count() - 1, 40_000);
}

#[test]
fn bloch_monitor_csv_format() {
    let path = tmp("bloch.csv");
    let out = bin()
        .args(["bloch", "--config"])
        .arg(config("bloch.cfg"))
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t_over_Tblo,b0_or_abs_bplus,N_eff,T_plus,T_minus"));
    assert_eq!(text.lines().count(), 161);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin().arg("report").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_key_is_a_usage_error() {
    let path = tmp("bad.cfg");
    std::fs::write(&path, "geometry = torus\n").unwrap();
    let out = bin()
        .args(["report", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
