use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn lamefem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamefem"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p4_config(n: usize) -> Value {
    json!({
        "box": { "n": n, "lengths": "pi" },
        "material": { "lambda": 2.0, "mu": 1.0, "omega": 1.0 },
        "source": { "case": "p4", "mode": [1, 1, 1] },
        "order": 2,
        "seed": 7,
    })
}

#[test]
fn mesh_box_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let out = lamefem(&["mesh-box", "--n", "2", "--L", "pi", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("m.summary.json"));
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["results"]["tets"], 48);
    assert_eq!(summary["inputs"]["lengths"][0], "pi");

    let out = lamefem(&["analyze-boundary", "m.json", "--report", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("row,id,x,y,z,s,patch,label,flat,included\n"));
    assert!(csv.contains("verdict,fourth,,,,,,,,admissible"));
    let summary = read_json(&dir.path().join("s.summary.json"));
    assert_eq!(summary["results"]["patches"].as_array().unwrap().len(), 6);
    assert_eq!(summary["results"]["smooth_max_abs_s"], 0.0);
}

#[test]
fn solve_writes_summary_audits_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", &p4_config(2));
    let out = lamefem(&["solve", "--config", "c.json", "--vtk", "u.vtk"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_json(&dir.path().join("u.summary.json"));
    assert_eq!(s["seed"], 7);
    assert_eq!(s["audits"]["pass"], true);
    assert_eq!(s["config"]["box"]["lengths"], "pi");
    assert!(s["results"]["error"]["l2_rel"].as_f64().unwrap() < 0.5);
    let vtk = std::fs::read_to_string(dir.path().join("u.vtk")).unwrap();
    for name in ["u_h", "v_p_h", "E_s_h", "u_exact", "v_p_exact", "E_s_exact"] {
        assert!(vtk.contains(name), "missing {name}");
    }
}

#[test]
fn fredholm_flag_matches_direct_solve() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", &p4_config(2));
    let run = |extra: &[&str], summary: &str| {
        let mut args = vec!["solve", "--config", "c.json", "--summary", summary];
        args.extend_from_slice(extra);
        assert_eq!(lamefem(&args, dir.path()).status.code(), Some(0));
        read_json(&dir.path().join(summary))["results"]["norms"]["l2"].as_f64().unwrap()
    };
    let direct = run(&[], "a.json");
    let fredholm = run(&["--fredholm"], "b.json");
    assert!((direct - fredholm).abs() <= 1e-8 * direct);
}

#[test]
fn verify_and_converge_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", &p4_config(2));
    let out = lamefem(&["verify-decoupling", "--config", "c.json", "--out", "rep.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = std::fs::read_to_string(dir.path().join("rep.csv")).unwrap();
    assert!(rep.starts_with("case,bc,order,n,metric,value\n"));
    assert!(rep.contains("p4,fourth,2,2,vp_cross_rel,"));

    let out = lamefem(&["converge", "--config", "c.json", "--levels", "1,2,3", "--out", "conv.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let conv = std::fs::read_to_string(dir.path().join("conv.csv")).unwrap();
    assert_eq!(conv.lines().count(), 4);
    let s = read_json(&dir.path().join("conv.summary.json"));
    assert!(s["results"]["finest_l2_rate"].as_f64().unwrap() > 1.0);
}

#[test]
fn resonance_scan_grid_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "box": { "n": 2, "lengths": "pi" },
        "material": { "lambda": 2.0, "mu": 1.0, "omega": 1.0 },
        "bc": "fourth",
        "order": 1,
    });
    write(dir.path(), "c.json", &cfg);
    let out = lamefem(
        &["resonance-scan", "--config", "c.json", "--from", "1.5", "--to", "2.5", "--steps", "3", "--out", "scan.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("row,sigma,value,residual,analytic,family\n"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("point,")).count(), 3);
}

#[test]
fn invalid_config_exits_2_with_error_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = p4_config(2);
    cfg["material"]["mu"] = json!(-1.0);
    write(dir.path(), "bad.json", &cfg);
    let out = lamefem(&["solve", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let s = read_json(&dir.path().join("bad.summary.json"));
    assert_eq!(s["status"], "error");
    assert_eq!(s["error"]["kind"], "validation");
}

#[test]
fn missing_inputs_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lamefem(&["analyze-boundary", "nope.json", "--report", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lamefem(&["mesh-box", "--n", "0", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lamefem(&["mesh-box", "--n", "2", "--L", "tau", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lamefem(&["solve"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resonant_manufactured_case_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = p4_config(2);
    cfg["material"]["omega"] = json!(12f64.sqrt());
    write(dir.path(), "r.json", &cfg);
    let out = lamefem(&["solve", "--config", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(read_json(&dir.path().join("r.summary.json"))["error"]["kind"], "resonance");
}
