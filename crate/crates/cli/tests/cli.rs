use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sympopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn result(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("result.json")).unwrap()).unwrap()
}

fn metric(r: &Value, name: &str) -> f64 {
    r["errors"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["name"] == name)
        .unwrap_or_else(|| panic!("metric {name} missing"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn single_oscillator_energy() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("run");
    let o = sympopt(&["solve", "--dims", "1", "--rho", "10", "--oracle", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    assert!((r["energy"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    for f in ["gamma.mat", "trace.csv", "factors/m1.mat", "factors/m2.mat", "factors/m3.mat", "factors/factors.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn lattice_energy_matches_oracle() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("run");
    let o = sympopt(&[
        "solve", "--dims", "3", "--rho", "2", "--tol", "1e-8", "--oracle", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    assert_eq!(r["status"], "converged");
    assert!(metric(&r, "energy_abs") < 1e-10);
    assert!(metric(&r, "cm_frobenius") < 1e-5);
}

#[test]
fn generic_file_problem() {
    let t = tempfile::tempdir().unwrap();
    let h = t.path().join("h.mat");
    fs::write(
        &h,
        "4 4\n2.0 0.3 0.1 0.0\n0.3 1.5 0.0 0.2\n0.1 0.0 1.2 0.1\n0.0 0.2 0.1 1.8\n",
    )
    .unwrap();
    let out = t.path().join("run");
    let o = sympopt(&[
        "solve", "--file", h.to_str().unwrap(), "--tol", "1e-9", "--oracle", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    assert_eq!(r["problem"]["modes"], 2);
    assert!(metric(&r, "energy_abs") < 1e-12);
    let c = sympopt(&["compare", "--run-dir", out.to_str().unwrap()]);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stdout));
}

#[test]
fn no_timing_reruns_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = t.path().join(name);
        let o = sympopt(&["partial", "-k", "2", "--dims", "2", "--rho", "2", "--no-timing", "--out-dir", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["result.json", "trace_k1.csv", "trace_k2.csv", "factors/m1.mat", "factors/m3.mat"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn partial_and_diagonalize_agree() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("d");
    assert_eq!(code(&sympopt(&["diagonalize", "--dims", "2", "--rho", "2", "--out-dir", d.to_str().unwrap()])), 0);
    assert!(d.join("spectrum.csv").exists() && d.join("gamma_sd.mat").exists());
    let eps: Vec<f64> = result(&d)["oracle"]["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let p = t.path().join("p");
    let o = sympopt(&["partial", "-k", "3", "--dims", "2", "--rho", "2", "--out-dir", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ev = result(&p)["eigenvalues"].as_array().unwrap().clone();
    for (a, b) in ev.iter().zip(&eps) {
        assert!((a.as_f64().unwrap() - b).abs() < 1e-9);
    }
}

#[test]
fn rho_list_chains_warm_starts() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("sweep");
    let o = sympopt(&["solve", "--dims", "3", "--rho-list", "2.0,1.9", "--rho", "2", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let second = result(&out.join("rho_1.9"));
    assert!(second["init"].as_str().unwrap().starts_with("warm:"));
    assert!(fs::read_to_string(out.join("rho_1.9/trace.csv")).unwrap().starts_with("# warm start:"));
}

#[test]
fn gradcheck_passes_and_catches_corruption() {
    for mode in ["energy", "gap", "partial:2"] {
        let o = sympopt(&["gradcheck", "--dims", "2", "--rho", "1.5", "--c", "0.1", "--mode", mode]);
        assert_eq!(code(&o), 0, "{mode}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = sympopt(&["gradcheck", "--dims", "2", "--rho", "1.5", "--corrupt-gradient"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path().to_str().unwrap();
    assert_eq!(code(&sympopt(&["--help"])), 0);
    assert_eq!(code(&sympopt(&["frobnicate"])), 1);
    assert_eq!(code(&sympopt(&["solve", "--out-dir", dir])), 1);
    assert_eq!(code(&sympopt(&["solve", "--dims", "2", "--rho", "2", "--file", "h.mat", "--out-dir", dir])), 1);
    assert_eq!(code(&sympopt(&["gradcheck", "--dims", "2", "2", "--rho", "2"])), 1);
    assert_eq!(code(&sympopt(&["compare", "--run-dir", dir])), 1);
    // the dipole coupling outgrows the on-site term at small ρ
    assert_eq!(code(&sympopt(&["diagonalize", "--dims", "2", "2", "--rho", "0.5", "--out-dir", dir])), 2);
}

#[test]
fn gap_cannot_warm_start_from_energy_factors() {
    let t = tempfile::tempdir().unwrap();
    let e = t.path().join("e");
    assert_eq!(code(&sympopt(&["solve", "--dims", "2", "--rho", "2", "--out-dir", e.to_str().unwrap()])), 0);
    let warm = format!("warm:{}", e.join("factors").display());
    let g = t.path().join("g");
    let o = sympopt(&["gap", "--dims", "2", "--rho", "2", "--init", &warm, "--out-dir", g.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let p = t.path().join("p");
    let o = sympopt(&["partial", "-k", "2", "--dims", "2", "--rho", "2", "--init", &warm, "--out-dir", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
