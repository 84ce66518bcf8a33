use std::path::Path;

use ptstl::cli::run_with;
use ptstl::trace::load_dataset;
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn ptstl(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ptstl").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "{}", r.err);
    serde_json::from_str(&r.out).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

const CONFIG: &str = r#"{
    "time": {"lower": 0, "upper": 4, "step": 1},
    "variables": {"x": {"lower": 0, "upper": 10, "step": 1}, "y": {"lower": 0, "upper": 10, "step": 1}}
}"#;

fn planted(dir: &Path) -> String {
    let data = path(dir, "planted.csv");
    let r = ptstl(&[
        "gen",
        "planted",
        "--seed",
        "3",
        "--traces",
        "4",
        "--length",
        "50",
        "--vars",
        "x,y",
        "--formula",
        "(P[1,2] (x > 6)) and (y < 5)",
        "--out",
        &data,
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    data
}

#[test]
fn eval_reports_metrics_and_writes_labels() {
    let dir = tempfile::tempdir().unwrap();
    let data = planted(dir.path());
    let labels = path(dir.path(), "labels.csv");
    let plot = path(dir.path(), "plot.csv");
    let r = ptstl(&[
        "eval",
        "--data",
        &data,
        "--formula",
        "(P[1,2] (x > 6)) and (y < 5)",
        "--labels-out",
        &labels,
        "--report-plot-data",
        &plot,
    ]);
    let m = json(&r);
    assert_eq!(m["accuracy"], 1.0);
    assert_eq!(m["total"], 200);
    assert_eq!(m["fn"], 0);
    let text = std::fs::read_to_string(&labels).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert!(text.starts_with("trace,t,label"));
    assert!(std::fs::read_to_string(&plot).unwrap().lines().next().unwrap().split(',').count() >= 4);
}

#[test]
fn optimize_prints_a_fitted_formula() {
    let dir = tempfile::tempdir().unwrap();
    let data = planted(dir.path());
    let cfg = path(dir.path(), "cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let r =
        ptstl(&["optimize", "--data", &data, "--config", &cfg, "--template", "P[?a,?b] (x > ?c)", "--fp-bound", "0"]);
    let v = json(&r);
    assert_eq!(v["fp"], 0);
    assert!(v["tp"].as_u64().unwrap() > 0);
    assert!(v["formula"].as_str().unwrap().starts_with("P["));
    assert_eq!(v["valuation"].as_object().unwrap().len(), 3);
}

#[test]
fn enumerate_prints_templates() {
    let r = ptstl(&["enumerate", "--vars", "x", "--max-ops", "1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out.lines().count(), 39);
    let r = ptstl(&["enumerate", "--vars", "x,y", "--max-ops", "1", "--shift", "2", "--prune"]);
    assert!(r.out.lines().all(|l| l.starts_with("P[2,2] ")));
    assert!(r.out.lines().count() < 5 + 90);
}

#[test]
fn synthesize_recovers_the_planted_formula() {
    let dir = tempfile::tempdir().unwrap();
    let data = planted(dir.path());
    let cfg = path(dir.path(), "cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let tpls = path(dir.path(), "templates.txt");
    std::fs::write(&tpls, "# candidates\n(P[?p1,?p2] (x > ?p3)) and (y < ?p4)\nx > ?p1\n").unwrap();
    let report = path(dir.path(), "report.txt");
    let r = ptstl(&[
        "synthesize",
        "--data",
        &data,
        "--config",
        &cfg,
        "--fp-bound",
        "0",
        "--max-disjuncts",
        "2",
        "--templates",
        &tpls,
        "--report",
        &report,
    ]);
    let v = json(&r);
    assert_eq!(v["combined_metrics"]["accuracy"], 1.0);
    assert_eq!(v["templates"], 2);
    assert!(std::fs::read_to_string(&report).unwrap().contains("accuracy=1.0000"));
    assert!(r.err.is_empty());

    let r = ptstl(&[
        "synthesize",
        "--data",
        &data,
        "--config",
        &cfg,
        "--fp-bound",
        "0",
        "--max-disjuncts",
        "1",
        "--max-ops",
        "0",
    ]);
    let v = json(&r);
    assert_eq!(v["templates"], 5);
    assert!(r.err.contains("combined:"));
}

#[test]
fn gen_traffic_writes_labeled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "traffic.csv");
    let r = ptstl(&["gen", "traffic", "--seed", "1", "--traces", "3", "--length", "10", "--out", &data]);
    assert_eq!(r.code, 0, "{}", r.err);
    let d = load_dataset(&data).unwrap();
    assert_eq!(d.total_points(), 30);
    let r = ptstl(&["gen", "traffic", "--traces", "1", "--length", "2"]);
    assert_eq!(r.out.lines().next().unwrap(), "trace,t,x0,x1,x2,x3,x4,x5,s0,s1,label");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = planted(dir.path());
    let cfg = path(dir.path(), "cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();

    assert_eq!(ptstl(&["--help"]).code, 0);
    assert_eq!(ptstl(&[]).code, 1);
    assert_eq!(ptstl(&["eval", "--data", &data]).code, 1);
    // malformed formula
    assert_eq!(ptstl(&["eval", "--data", &data, "--formula", "x >"]).code, 1);
    // missing file and unknown column are data problems
    assert_eq!(ptstl(&["eval", "--data", "/nonexistent.csv", "--formula", "x > 1"]).code, 2);
    let r = ptstl(&["eval", "--data", &data, "--formula", "z > 1"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("`z`"));
    // broken config
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, r#"{"time": {"lower": 0, "upper": 4}}"#).unwrap();
    assert_eq!(
        ptstl(&["optimize", "--data", &data, "--config", &bad, "--template", "x > ?p", "--fp-bound", "0"]).code,
        1
    );
    let zero =
        ["synthesize", "--data", &data, "--config", &cfg, "--fp-bound", "0", "--max-disjuncts", "0", "--max-ops", "0"];
    assert_eq!(ptstl(&zero).code, 1);
    let shift0 = ["enumerate", "--vars", "x", "--max-ops", "0", "--shift", "0"];
    assert_eq!(ptstl(&shift0).code, 1);
    let noise =
        ["gen", "planted", "--traces", "1", "--length", "5", "--vars", "x", "--formula", "x > 1", "--noise", "0.7"];
    assert_eq!(ptstl(&noise).code, 1);
}
