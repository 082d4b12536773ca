use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pprls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pprls"))
        .args(args)
        .current_dir(dir)
        .env("PPRLS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_graph_ppr_sweep_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = pprls(&["generate", "--model", "two-moons", "--n", "120", "--seed", "3", "--out", "pts.csv"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pts = fs::read_to_string(d.join("pts.csv")).unwrap();
    assert_eq!(pts.lines().count(), 121);

    let o = pprls(&["graph", "--points", "pts.csv", "--smallest-connected", "--out", "g.edges"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = pprls(&["ppr", "--graph", "g.edges", "--seed-vertex", "5", "--alpha", "0.01", "--out", "p.csv"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 121);
    let total: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    let o = pprls(&["sweep", "--graph", "g.edges", "--seed-vertex", "5", "--alpha", "0.01"], d);
    assert!(o.status.success());
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["seed"], 5);
    assert!(!rec["members"].as_array().unwrap().is_empty());

    let o = pprls(&["mixing", "--graph", "g.edges", "--method", "propagation"], d);
    assert!(o.status.success());
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep["tau_inf"].as_u64().is_some());
}

#[test]
fn hardcase_writes_report_and_one_svg_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("hc.json"), r#"{"experiment": "hard_case", "n": 400, "trials": 2}"#).unwrap();
    let o = pprls(&["hardcase", "--config", "hc.json", "--out", "res", "--svg", "out"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("res/hardcase.json")).unwrap()).unwrap();
    assert_eq!(report["cases"][0]["trials"].as_array().unwrap().len(), 2);
    let svgs = fs::read_dir(d.join("out")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "svg").count();
    assert_eq!(svgs, 2);
}

#[test]
fn bounds_config_produces_schema_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("fig2.json"), r#"{"grid": [0.2], "n": 300, "trials": 1}"#).unwrap();
    let o = pprls(&["bounds", "--config", "fig2.json", "--out", "."], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("bounds.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sweep_var,value,trial,empirical,theoretical,quantity,d"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(pprls(&["frobnicate"], d).status.code(), Some(2));
    assert_eq!(pprls(&[], d).status.code(), Some(2));
    assert_eq!(pprls(&["--help"], d).status.code(), Some(0));

    fs::write(d.join("bad.json"), r#"{"trials": 0}"#).unwrap();
    assert_eq!(pprls(&["moons", "--config", "bad.json"], d).status.code(), Some(2));
    fs::write(d.join("typo.json"), r#"{"trails": 3}"#).unwrap();
    assert_eq!(pprls(&["hardcase", "--config", "typo.json"], d).status.code(), Some(2));
    fs::write(d.join("other.json"), r#"{"experiment": "moons"}"#).unwrap();
    assert_eq!(pprls(&["bounds", "--config", "other.json"], d).status.code(), Some(2));

    // Two components: mixing never happens, which is a numeric failure.
    fs::write(d.join("split.edges"), "4 0\n0 1\n2 3\n").unwrap();
    let o = pprls(&["mixing", "--graph", "split.edges"], d);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pprls(&["sweep", "--graph", "split.edges", "--seed-vertex", "0", "--alpha", "0.1", "--lower", "0.9", "--upper", "1"], d);
    assert_eq!(o.status.code(), Some(3));
}
