use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn stkernel(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stkernel"));
    c.args(args).env_remove("STKERNEL_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn run_config(dir: &Path, cfg: &Value, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let out = dir.join("out");
    let mut args = vec!["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-timestamp"];
    args.extend_from_slice(extra);
    stkernel(&args, &[])
}

fn tap() -> Value {
    json!({ "sigma2": 1.0, "beta": 1.0, "mu": 4.0, "kappa": 0.0, "xi": 1.0, "delta": 1.0, "gamma_exp": 4.0, "dim": 1 })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn compat_identical_models() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), &json!({ "command": "compat", "model": { "dgw_tap": tap() }, "model_b": { "dgw_tap": tap() } }), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/compat.json")).unwrap()).unwrap();
    assert_eq!(report["compatible"], json!(true));
    let mut keys: Vec<_> = report.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["compatible", "gates", "lhs", "rel_gap", "rhs", "tol"]);
    for g in report["gates"].as_array().unwrap() {
        assert_eq!(g.as_object().unwrap().len(), 3);
    }
}

#[test]
fn eval_zeros_beyond_temporal_support() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "command": "eval",
        "model": { "dgw_tap": tap() },
        "eval": { "r": { "linspace": { "start": 0.0, "stop": 1.0, "num": 11 } },
                  "t": { "linspace": { "start": 0.0, "stop": 2.0, "num": 17 } } }
    });
    assert!(run_config(dir.path(), &cfg, &[]).status.success());
    let (header, rows) = read_csv(&dir.path().join("out/eval.csv"));
    assert_eq!(header, ["r", "t", "value"]);
    assert_eq!(rows.len(), 11 * 17);
    for row in rows {
        let t: f64 = row[1].parse().unwrap();
        let v: f64 = row[2].parse().unwrap();
        if t >= 1.0 {
            assert_eq!(v, 0.0, "t = {t}");
        } else if row[0] == "0" {
            assert!(v > 0.0);
        }
    }
}

#[test]
fn missing_field_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = tap();
    p.as_object_mut().unwrap().remove("xi");
    let o = run_config(dir.path(), &json!({ "command": "compat", "model": { "dgw_tap": p }, "model_b": { "dgw_tap": tap() } }), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("field=model.dgw_tap.xi"), "{err}");
}

#[test]
fn inadmissible_and_extraneous_blocks_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = tap();
    p["xi"] = json!(-1.0);
    let o = run_config(dir.path(), &json!({ "command": "compat", "model": { "dgw_tap": p }, "model_b": { "dgw_tap": tap() } }), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_config(dir.path(), &json!({ "command": "mc", "model": { "dgw_tap": tap() } }), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("field=model"));
    let o = run_config(dir.path(), &json!({ "command": "eval", "model": { "dgw_tap": tap() }, "colour": 1 }), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = stkernel(&["--schema"], &[("STKERNEL_THREADS", "0")]);
    assert!(o.status.success());
    let cfg = json!({ "command": "compat", "model": { "dgw_tap": tap() }, "model_b": { "dgw_tap": tap() } });
    let path = dir.path().join("c.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = stkernel(&["--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], &[("STKERNEL_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("field=STKERNEL_THREADS"));
}

#[test]
fn schema_lists_commands_and_defaults() {
    let o = stkernel(&["--schema"], &[]);
    assert!(o.status.success());
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["defaults"]["series"]["rel_tol"], json!(1e-12));
    let names: Vec<&str> = s["command"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for c in ["eval", "spectrum", "compat", "assemble", "simulate", "fit", "krige", "mc", "misspec"] {
        assert!(names.contains(&c));
        assert!(s["commands"][c]["example"].is_object());
    }
    assert_eq!(s["defaults"]["jitter"]["ladder"], json!([0.0, 1e-12, 1e-10, 1e-8]));
}

#[test]
fn assemble_exports_coo_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("design.csv"), "x,t\n0,0.5\n0.5,0\n1,0\n0,0\n0.25,0.5\n").unwrap();
    let cfg = json!({ "command": "assemble", "model": { "dgw_tap": tap() }, "design": { "csv": "design.csv" } });
    let o = run_config(dir.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/assemble.csv"));
    assert_eq!(header, ["i", "j", "value"]);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/assemble.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], json!(5));
    assert_eq!(meta["nnz"], json!(rows.len()));
    assert_eq!(meta["layout"], json!("csr"));
    assert_eq!(meta["time_slices"], json!([0, 3, 5]));
    let (ph, points) = read_csv(&dir.path().join("out/assemble_points.csv"));
    assert_eq!(ph, ["i", "input_row", "x", "t"]);
    assert_eq!(points[0][1], "1");
    for r in &rows {
        let (i, j) = (&r[0], &r[1]);
        assert!(rows.iter().any(|s| &s[0] == j && &s[1] == i && s[2] == r[2]));
    }
}

#[test]
fn simulate_then_fit_and_krige() {
    let dir = tempfile::tempdir().unwrap();
    let design = json!({ "grid": { "n_space": 6, "m_time": 5, "dim": 1, "space": [0.0, 1.0], "horizon": [0.0, 1.0] } });
    let sim = json!({ "command": "simulate", "model": { "dgw_tap": tap() }, "design": design, "simulate": { "replicates": 3 } });
    assert!(run_config(dir.path(), &sim, &["--seed", "5"]).status.success());
    let data = dir.path().join("out/simulate.csv");
    let (header, rows) = read_csv(&data);
    assert_eq!(header, ["replicate", "x", "t", "value"]);
    assert_eq!(rows.len(), 90);

    let fit_dir = tempfile::tempdir().unwrap();
    let fit = json!({ "command": "fit", "model": { "dgw_tap": tap() }, "data": { "csv": data } });
    let o = run_config(fit_dir.path(), &fit, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, fits) = read_csv(&fit_dir.path().join("out/fit.csv"));
    assert_eq!(fits.len(), 3);
    assert!(fits.iter().all(|f| f[1] == "30" && f[4] == "tap_delta1"));

    let kdir = tempfile::tempdir().unwrap();
    let kr = json!({ "command": "krige", "model": { "dgw_tap": tap() }, "data": { "csv": data },
                     "krige": { "targets": [[0.2, 0.25], [0.5, 0.5], [7.0, 7.0]] } });
    let o = run_config(kdir.path(), &kr, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (kh, krows) = read_csv(&kdir.path().join("out/krige.csv"));
    assert_eq!(kh, ["replicate", "x", "t", "predictor", "krige_var", "clamped"]);
    let observed = rows.iter().find(|r| r[0] == "0" && r[1] == "0.2" && r[2] == "0.25").unwrap();
    assert_eq!(krows[0][3], observed[3]);
    assert_eq!(krows[0][4], "0");
    assert_eq!(krows[2][3], "0");
    assert_eq!(krows[2][4], "1");
}

#[test]
fn seed_flag_changes_simulation_and_sidecar_records_it() {
    let dir = tempfile::tempdir().unwrap();
    let design = json!({ "grid": { "n_space": 4, "m_time": 3, "dim": 1, "space": [0.0, 1.0], "horizon": [0.0, 1.0] } });
    let sim = json!({ "command": "simulate", "model": { "dgw_tap": tap() }, "design": design });
    assert!(run_config(dir.path(), &sim, &["--seed", "1"]).status.success());
    let a = std::fs::read(dir.path().join("out/simulate.csv")).unwrap();
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("out/simulate.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], json!(1));
    assert!(meta.get("timestamp").is_none());
    assert!(meta["versions"]["stkernel"].is_string());
    assert!(run_config(dir.path(), &sim, &["--seed", "2"]).status.success());
    let b = std::fs::read(dir.path().join("out/simulate.csv")).unwrap();
    assert_ne!(a, b);
}
