use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use calr3d_core::{MultipoleSource, Vec3};
use serde_json::Value;

const CASE_I: &str = r#"{
  "geometry": {"r_i": 1, "r_e": 2, "r_0": 4},
  "materials": {"eps_c": 1, "eps_s": -1, "delta": 0.001, "delta_grid": {"kind": "rho_powers", "from": 3, "to": 12}},
  "source": {"kind": "dipole", "position": [0, 0, 2.4], "moment": [0, 0.6, 0.8]},
  "field": {"plane": "xz", "extent": 5, "resolution": 11},
  "lemma": {"degrees": [1, 5], "draws": 2, "samples": 500}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calr3d"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_cfg(cmd: &str, cfg: &Path) -> Output {
    run(&[cmd, "--config", cfg.to_str().unwrap()])
}

fn first_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().next().unwrap_or("").to_string()
}

#[test]
fn csv_headers_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CASE_I);
    assert_eq!(first_line(&run_cfg("sweep", &cfg)), "delta,E_exact,E_approx,N_used,N_delta");
    assert_eq!(first_line(&run_cfg("field", &cfg)), "x,y,z,region,V_re,V_im");
    assert_eq!(first_line(&run_cfg("lemma-check", &cfg)), "n,draw,residual,sampled_sup,bound,pass");
}

#[test]
fn sweep_rows_match_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CASE_I);
    let out = run_cfg("sweep", &cfg);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.windows(2).all(|w| w[1][0] < w[0][0]));
    for r in &rows {
        assert!(r[1] > 0.0 && r[2] > 0.0);
        assert!(r[3] >= r[4].ceil());
    }
}

#[test]
fn solve_reports_energy_and_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CASE_I);
    let out_path = dir.path().join("solve.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert!(doc["E_exact"].as_f64().unwrap() > 0.0);
    assert!(doc["N_used"].as_u64().unwrap() as f64 >= doc["N_delta"].as_f64().unwrap().ceil());

    // the echoed configuration reproduces the run
    let again = write(dir.path(), "again.json", &serde_json::to_string(&doc["effective_config"]).unwrap());
    let out2 = run_cfg("solve", &again);
    let doc2: Value = serde_json::from_slice(&out2.stdout).unwrap();
    assert_eq!(doc["E_exact"], doc2["E_exact"]);
    assert_eq!(doc["effective_config"], doc2["effective_config"]);
}

#[test]
fn uniform_medium_field_is_the_dipole_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.json",
        r#"{
  "geometry": {"r_i": 1, "r_e": 2, "r_0": 4},
  "materials": {"eps_c": 1, "eps_s": -1, "delta": 0},
  "source": {"kind": "dipole", "position": [0.5, 0, 5], "moment": [1, 0, 0]},
  "field": {"plane": "xz", "extent": 8, "resolution": 17}
}"#,
    );
    let out = run_cfg("field", &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let src = MultipoleSource::dipole(Vec3::E1, Vec3::new(0.5, 0.0, 5.0), 200).unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let mut compared = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[3] != "matrix" {
            continue;
        }
        let x = Vec3::new(f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        // the truncated series needs the point well away from the source
        if (x - Vec3::new(0.5, 0.0, 5.0)).norm() < 2.0 {
            continue;
        }
        let want = src.potential(x).unwrap();
        let got: f64 = f[4].parse().unwrap();
        assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-3), "{x:?}: {got} vs {want}");
        assert!(f[5].parse::<f64>().unwrap().abs() <= 1e-8 * want.abs().max(1e-3));
        compared += 1;
    }
    assert!(compared > 50);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["solve", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = write(dir.path(), "bad.json", &CASE_I.replace(r#""r_i": 1"#, r#""r_i": 3"#));
    let out = run_cfg("solve", &bad);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry"));

    let res1 = write(dir.path(), "res1.json", &CASE_I.replace(r#""resolution": 11"#, r#""resolution": 1"#));
    assert_eq!(run_cfg("field", &res1).status.code(), Some(2));

    let empty = write(dir.path(), "empty.json", &CASE_I.replace(r#""extent": 5"#, r#""extent": 0"#));
    assert_eq!(run_cfg("field", &empty).status.code(), Some(2));

    let unknown = write(dir.path(), "unk.json", &CASE_I.replace(r#""field": {"#, r#""field": {"colour": 1, "#));
    let out = run_cfg("field", &unknown);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let inside = write(dir.path(), "inside.json", &CASE_I.replace("[0, 0, 2.4]", "[0, 0, 1.5]"));
    assert_eq!(run_cfg("solve", &inside).status.code(), Some(2));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn case_iii_has_no_critical_radius() {
    let dir = tempfile::tempdir().unwrap();
    let body = CASE_I
        .replace(r#""eps_s": -1"#, r#""eps_s": -2"#)
        .replace(r#""lemma""#, r#""classify": {"critical_radius": true}, "lemma""#);
    let cfg = write(dir.path(), "iii.json", &body);
    let out = run_cfg("classify", &cfg);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["status"], "no critical radius");
    assert_eq!(doc["regime"], "case-iii");
}

#[test]
fn classify_case_i_blows_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CASE_I);
    let out = run_cfg("classify", &cfg);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["regime"], "case-i");
    assert_eq!(doc["blow_up"], true);
    assert_eq!(doc["gap_verdict"], "diverges");
    assert!(doc["growth_exponent"].as_f64().unwrap() < 0.0);
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CASE_I);
    let a = run(&["lemma-check", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    let b = run(&["lemma-check", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    let c = run(&["lemma-check", "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let threads = bin()
        .args(["sweep", "--config", cfg.to_str().unwrap()])
        .env("CALR3D_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(threads.stdout, run_cfg("sweep", &cfg).stdout);
}

#[test]
fn lemma_check_runs_without_config() {
    let out = run(&["lemma-check", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn help_documents_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Exit status"));
    assert!(text.contains("CALR3D_THREADS"));
}
