//! End-to-end drives of the binary: generate, transform, verify.

use std::process::Command;

fn msa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msa"))
}

#[test]
fn gen_scale_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("series");
    let status = msa()
        .args([
            "gen",
            "--field",
            "taylor-green",
            "--grid",
            "16",
            "--snapshots",
            "3",
            "--tmax",
            "0.2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("u.c0.msf").exists());
    assert!(out.join("pressure.msf").exists());
    assert!(out.join("energy.csv").exists());

    // Scale operator over the pressure magnitude field.
    let prefix = dir.path().join("scaled");
    let status = msa()
        .args(["scale", "--alpha", "1.5", "--mode", "spacetime", "--ladder", "6,3", "--in"])
        .arg(out.join("pressure.msf"))
        .arg("--out")
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("scaled_s.msf").exists());
    assert!(dir.path().join("scaled_a.msf").exists());
    assert!(dir.path().join("scaled_labels.bin").exists());
}

#[test]
fn lagrangian_scale_with_cylinder_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("series");
    assert!(msa()
        .args([
            "gen",
            "--field",
            "random",
            "--grid",
            "16",
            "--snapshots",
            "4",
            "--tmax",
            "0.1",
            "--dt",
            "0.002",
            "--amplitude",
            "0.5",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let prefix = dir.path().join("capped");
    let status = msa()
        .args(["lagrangian-scale", "--alpha", "4", "--drift"])
        .arg(out.join("u.msf"))
        .arg("--in")
        .arg(out.join("grad_u.msf"))
        .arg("--out")
        .arg(&prefix)
        .args(["--dump-cylinder", "0.08,3.0,3.0,0.8,0.2"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("capped_s.msf").exists());
    assert!(dir.path().join("capped_cylinder.json").exists());
    let dump: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("capped_cylinder.json")).unwrap())
            .unwrap();
    assert!(dump["backbone"].as_array().unwrap().len() >= 16);
}

#[test]
fn verify_writes_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("rows.csv");
    let status = msa()
        .args(["verify", "--suite", "cantor", "--depth", "6", "--report"])
        .arg(&json)
        .arg("--csv")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("cantor-superlevel"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("name,"));

    // Unknown suites are usage errors (exit 2).
    let status = msa().args(["verify", "--suite", "nope"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn lattice_emits_csv() {
    let output = msa()
        .args(["lattice", "--grid", "16", "--snapshots", "3", "--tmax", "0.2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("order,inv_p,inv_q,kind,value"));
    assert!(text.lines().count() > 5);
}
