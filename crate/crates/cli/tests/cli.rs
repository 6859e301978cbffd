use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn utmq(config: &Path, out: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_utmq"));
    cmd.arg("--config").arg(config).arg("--out").arg(out).args(extra).env_remove("UTMQ_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const ZERO_SOLVE: &str = r#"
command = "solve"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
[eval]
x = [0.5, 1.0]
t = [0.2, 1.0]
orders = [[0, 0], [1, 1]]
"#;

const RAMP_SOLVE: &str = r#"
command = "solve"
seed = 7
[problem]
family = "ch_plus"
alpha = 1.0
beta = 2.0
u0 = { id = "poly_exp", params = { k = 2 } }
g0 = { id = "ramp", params = { c = 1.0, a = 1.0 } }
[eval]
x = [0.5, 1.5]
t = [0.25]
random = { count = 4, x = [0.5, 3.0], t = [0.1, 1.0] }
"#;

#[test]
fn zero_problem_gives_zero_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.toml", ZERO_SOLVE);
    let out = dir.path().join("out");
    let res = utmq(&cfg, &out, &[], &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,t,n,m,re_value,im_value,abs_err_est"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 7);
        assert_eq!(&cells[4..], ["0e0", "0e0", "0e0"]);
    }
    let rep = report(&out);
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["status"], "pass");
    assert!(out.join("plot.gp").exists());
}

#[test]
fn misspelled_key_is_a_config_error_without_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &ZERO_SOLVE.replace("alpha = 1.0", "alpah = 1.0"));
    let out = dir.path().join("out");
    let res = utmq(&cfg, &out, &[], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_preset_and_bad_points_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let preset = ZERO_SOLVE.replace("beta = 1.0", "beta = 1.0\ng0 = { id = \"sawtooth\" }");
    let res = utmq(&write_config(&dir, "a.toml", &preset), &out, &[], &[]);
    assert_eq!(res.status.code(), Some(2));
    let points = ZERO_SOLVE.replace("x = [0.5, 1.0]", "x = [0.0, 1.0]");
    let res = utmq(&write_config(&dir, "b.toml", &points), &out, &[], &[]);
    assert_eq!(res.status.code(), Some(2));
    let order = ZERO_SOLVE.replace("[1, 1]", "[1, 2]");
    let res = utmq(&write_config(&dir, "c.toml", &order), &out, &[], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn csv_is_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "ramp.toml", RAMP_SOLVE);
    let runs = [
        (dir.path().join("one"), vec!["--threads", "1"], vec![]),
        (dir.path().join("env"), vec![], vec![("UTMQ_THREADS", "3")]),
        (dir.path().join("again"), vec!["--threads", "1"], vec![]),
    ];
    let mut csvs = Vec::new();
    for (out, flags, envs) in &runs {
        let res = utmq(&cfg, out, flags, envs);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        csvs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
    assert_eq!(String::from_utf8_lossy(&csvs[0]).lines().count(), 7);
}

#[test]
fn tol_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "ramp.toml", &format!("tol = 1e-6\n{RAMP_SOLVE}"));
    let out = dir.path().join("out");
    let res = utmq(&cfg, &out, &["--tol", "1e-8"], &[]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(report(&out)["tol"], 1e-8);
}

#[test]
fn quadrature_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let body = r#"
command = "solve"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
g0 = { id = "sin" }
[eval]
points = [[0.5, 0.3]]
representation = "boundary"
"#;
    let out = dir.path().join("out");
    let res = utmq(&write_config(&dir, "n.toml", body), &out, &[], &[]);
    assert_eq!(res.status.code(), Some(3));
    let rep = report(&out);
    assert_eq!(rep["status"], "numerical_failure");
    assert!(!out.join("results.csv").exists());
}

#[test]
fn nonuniqueness_report_fields_and_exit_code_agree() {
    let dir = TempDir::new().unwrap();
    let body = r#"
command = "nonuniqueness-demo"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
[check]
r = 1.5
"#;
    let out = dir.path().join("out");
    let res = utmq(&write_config(&dir, "nu.toml", body), &out, &[], &[]);
    let rep = report(&out);
    let results = &rep["results"];
    let (b, i, r) = (results["boundary_max"].as_f64().unwrap(), results["interior_max"].as_f64().unwrap(), results["ratio"].as_f64().unwrap());
    assert!(b > 0.0 && i > 0.0);
    assert!((r - i / b).abs() <= 1e-12 * r);
    let all_pass = rep["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true);
    assert_eq!(rep["status"], if all_pass { "pass" } else { "fail" });
    assert_eq!(res.status.code(), Some(if all_pass { 0 } else { 1 }));
    println!("nonuniqueness ratio {r:.3e}, exit {:?}", res.status.code());
}

#[test]
fn half_value_and_global_relation_pass() {
    let dir = TempDir::new().unwrap();
    let hv = r#"
command = "half-value"
[problem]
family = "biharmonic"
g0 = { id = "const" }
"#;
    let out = dir.path().join("hv");
    assert_eq!(utmq(&write_config(&dir, "hv.toml", hv), &out, &[], &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("t,g0,re_value,im_value,re_ratio,im_ratio,radius\n"));

    let gr = r#"
command = "global-relation"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
u0 = { id = "exp" }
[check]
t = 0.5
"#;
    let out = dir.path().join("gr");
    assert_eq!(utmq(&write_config(&dir, "gr.toml", gr), &out, &[], &[]).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out.join("results.csv")).unwrap().lines().count(), 13);
}

#[test]
fn contour_dump_lists_path_and_cuts() {
    let dir = TempDir::new().unwrap();
    let body = r#"
command = "contour-dump"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
[check]
truncation_r = 8.0
per_segment = 4
"#;
    let out = dir.path().join("out");
    assert_eq!(utmq(&write_config(&dir, "c.toml", body), &out, &[], &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("path,")));
    assert_eq!(csv.lines().filter(|l| l.starts_with("cut,")).count(), 10);
}

#[test]
fn family_mismatch_is_rejected() {
    let dir = TempDir::new().unwrap();
    let body = r#"
command = "half-value"
[problem]
family = "ch_plus"
alpha = 1.0
beta = 1.0
"#;
    let out = dir.path().join("out");
    assert_eq!(utmq(&write_config(&dir, "c.toml", body), &out, &[], &[]).status.code(), Some(2));
    assert!(!out.exists());
}
