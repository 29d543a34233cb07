use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use helmholtz_core::geometry::{BoundaryFunction, BoxField, BoxGrid, PerturbedHalfSpace};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn helmholtz(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_helmholtz"));
    cmd.args(args).env_remove("HELM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_with_four() {
    assert_eq!(code(&helmholtz(&["--help"], &[])), 0);
    assert_eq!(code(&helmholtz(&["decompose", "--bogus"], &[])), 4);
    assert_eq!(code(&helmholtz(&["frobnicate"], &[])), 4);

    let dir = tempfile::tempdir().unwrap();
    let bad_json = write_config(dir.path(), "bad.json", "{ not json");
    let bad_n = write_config(dir.path(), "n4.json", r#"{"n": 4}"#);
    let bad_res = write_config(dir.path(), "res.json", r#"{"grid": {"resolution": 30}}"#);
    for cfg in [&bad_json, &bad_n, &bad_res] {
        let out = helmholtz(&["norms", "--config", cfg], &[]);
        assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&helmholtz(&["norms", "missing.json"], &[])), 4);
    assert_eq!(code(&helmholtz(&["check-smallness"], &[("HELM_THREADS", "lots")])), 4);
}

#[test]
fn smallness_gate() {
    let flat = helmholtz(&["check-smallness", "--threads", "1"], &[]);
    assert_eq!(code(&flat), 0);
    let report = json(&flat);
    assert_eq!(report["smallness"]["empirical_2s_norm"], 0.0);
    assert_eq!(report["symbolic_pass"], true);

    // R_h = 0.6 fails the first condition: 0.6^{5/6} ≈ 0.653 > 1/2.
    let dir = tempfile::tempdir().unwrap();
    let wide = write_config(
        dir.path(),
        "wide.json",
        r#"{"boundary": {"kind": "smooth_bump", "amplitude": 0.01, "radius": 0.6}, "quadrature": {"cells": 32}}"#,
    );
    let out = helmholtz(&["check-smallness", "--config", &wide], &[]);
    assert_eq!(code(&out), 2);
    let report = json(&out);
    assert_eq!(report["smallness"]["first_condition"], false);
    assert_eq!(report["contractive"], true);

    // The symbolic second condition with C*(n) = 1 is far from met for the bump.
    let bump = write_config(
        dir.path(),
        "bump.json",
        r#"{"boundary": {"kind": "smooth_bump", "amplitude": 0.01, "radius": 0.3}, "quadrature": {"cells": 32}}"#,
    );
    assert_eq!(code(&helmholtz(&["check-smallness", "--config", &bump], &[])), 0);
    let out = helmholtz(&["check-smallness", "--config", &bump, "--cstar", "1"], &[]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["smallness"]["second_condition"], false);
}

#[test]
fn identity_suite_passes_and_fails_where_expected() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let flat = configs().join("flat.json");
    let out =
        helmholtz(&["verify-identities", "--config", flat.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let saved: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("verify-identities.json")).unwrap()).unwrap();
    assert_eq!(saved, json(&out));
    assert_eq!(saved["passed"], true);

    let bump = configs().join("bump.json");
    let out = helmholtz(&["verify-identities", "--config", bump.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let coarse = configs().join("coarse.json");
    let out = helmholtz(&["verify-identities", "--config", coarse.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed: \"Poisson half-limit"));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn norm_ledgers_of_trivial_fields() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_config(dir.path(), "zero.json", r#"{"field": "zero"}"#);
    let ledger = json(&helmholtz(&["norms", "--config", &zero], &[]));
    for key in ["linf", "bmo", "bnu", "l2"] {
        assert_eq!(ledger[key], 0.0, "{key}");
    }

    let constant = write_config(dir.path(), "constant.json", r#"{"field": "constant"}"#);
    let ledger = json(&helmholtz(&["norms", "--config", &constant], &[]));
    assert_eq!(ledger["bmo"], 0.0);
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let grid = BoxGrid::centred(2.0, -1.0, 3.0, 32).unwrap();
    let mask = BoxField::membership(&hs, &grid);
    let volume: f64 = (0..grid.len()).filter(|&i| mask[i]).map(|i| grid.trapezoid_weight(i)).sum();
    let l2 = ledger["l2"].as_f64().unwrap();
    assert!((l2 - volume.sqrt()).abs() < 1e-12 * l2, "{l2} {}", volume.sqrt());
}

#[test]
fn decompose_presets_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let swirl = write_config(dir.path(), "swirl.json", r#"{"field": "swirl", "samples": 20}"#);
    let out = helmholtz(&["decompose", "--config", &swirl], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = &json(&out)["summary"];
    let ratio = s["ledger_gradq"]["l2"].as_f64().unwrap() / s["ledger_v"]["l2"].as_f64().unwrap();
    assert!(ratio < 5e-2, "{ratio}");

    // Same gradient field, once as a preset and once from a field file.
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let cfg: helmholtz_cli::RunConfig = serde_json::from_str(r#"{"samples": 20}"#).unwrap();
    let v = cfg.field.build(&hs, cfg.box_grid().unwrap());
    let header = dir.path().join("v.json");
    helmholtz_core::io::write_field(&header, &v).unwrap();
    let grad_cfg = write_config(dir.path(), "grad.json", r#"{"samples": 20}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run = |field: Option<&Path>, out: &Path| {
        let mut args = vec!["decompose", "--config", &grad_cfg, "--out", out.to_str().unwrap()];
        if let Some(f) = field {
            args.push(f.to_str().unwrap());
        }
        helmholtz(&args, &[])
    };
    let first = run(None, &a);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let s = &json(&first)["summary"];
    let ratio = s["ledger_v0"]["l2"].as_f64().unwrap() / s["ledger_v"]["l2"].as_f64().unwrap();
    assert!(ratio < 5e-2, "{ratio}");
    assert_eq!(code(&run(Some(&header), &b)), 0);

    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    let v0 = helmholtz_core::io::read_field(&hs, &a.join("v0.json")).unwrap();
    assert_eq!(v0.grid(), v.grid());
}
