use std::path::Path;
use std::process::{Command, Output};

use copter::graph_io::load_graph_dir;
use copter_core::modelang::LanguageElement;
use copter_core::netgraph::Query;
use copter_core::planner::plan;

fn copter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copter")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = copter(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&copter(d.path(), &["--help"])), 0);
    assert_eq!(code(&copter(d.path(), &["plan", "--help"])), 0);
    assert_eq!(code(&copter(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&copter(d.path(), &["acceptability", "--pr-r", "0.5"])), 1);
    let bad_set = copter(d.path(), &["--set", "no.such.key=1", "acceptability", "--pr-r", "0.5", "--pr-u", "0.5"]);
    assert_eq!(code(&bad_set), 1, "{}", String::from_utf8_lossy(&bad_set.stderr));

    let missing = copter(d.path(), &["simulate", "--scenario", "nope.json", "--out", "r.json"]);
    assert_eq!(code(&missing), 2);
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.starts_with("copter: error: ") && err.contains("nope.json"), "{err}");
}

#[test]
fn version_lists_formats() {
    let d = tempfile::tempdir().unwrap();
    let v = String::from_utf8(ok(d.path(), &["--version"])).unwrap();
    assert!(v.contains(env!("CARGO_PKG_VERSION")));
    for f in ["graph-csv 1", "forest-model 1", "choice-model 1", "scenario 1", "sim-report 1"] {
        assert!(v.contains(f), "{v}");
    }
}

#[test]
fn log_level_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let run = |level: &str| {
        Command::new(env!("CARGO_BIN_EXE_copter"))
            .current_dir(d.path())
            .env("COPTER_LOG", level)
            .args(["synth-training", "--seed", "1", "--n", "300", "--out", "t.csv"])
            .output()
            .unwrap();
        Command::new(env!("CARGO_BIN_EXE_copter"))
            .current_dir(d.path())
            .env("COPTER_LOG", level)
            .args(["train-forest", "--data", "t.csv", "--target", "mode", "--seed", "1", "--out", "f.json"])
            .output()
            .unwrap()
    };
    let quiet = run("warn");
    assert!(quiet.status.success() && quiet.stderr.is_empty());
    let chatty = run("debug");
    assert!(String::from_utf8_lossy(&chatty.stderr).contains("trained"));
}

#[test]
fn acceptability_output() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["acceptability", "--pr-r", "0.4", "--pr-u", "0.2", "--intercept", "-1"]);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let odds = v["odds"].as_f64().unwrap();
    assert!((odds - 2.0).abs() < 1e-12);
    assert!((v["delta"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let p = v["adoption_prob"].as_f64().unwrap();
    let beta = v["beta_odds"].as_f64().unwrap();
    assert!((p - 1.0 / (1.0 + (1.0 - beta * 2.0).exp())).abs() < 1e-12);
}

#[test]
fn plan_matches_library() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth-grid", "--size", "6", "--out", "net"]);
    let args = ["--graph", "net", "--from", "r0c0", "--to", "r5c4", "--depart", "28800", "--deadline", "36000"];
    let mut dij: Vec<&str> = vec!["plan"];
    dij.extend(args);
    dij.extend(["--lang", "w*(b|s)+w*", "--strategy", "dijkstra"]);
    let mut ast = dij.clone();
    *ast.last_mut().unwrap() = "astar";
    let a = ok(d.path(), &dij);
    assert_eq!(a, ok(d.path(), &ast));

    let g = load_graph_dir(&d.path().join("net")).unwrap();
    let q = Query::new(&g, "r0c0", "r5c4", 28800, 36000).unwrap();
    let p = plan(&g, &q, &LanguageElement::parse("w*(b|s)+w*").unwrap().dfa).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["arrive"].as_u64().unwrap(), u64::from(p.arrive));
    assert_eq!(v["steps"].as_array().unwrap().len(), p.steps.len());

    let none = copter(d.path(), &["plan", "--graph", "net", "--from", "r0c0", "--to", "r5c4", "--depart", "28800", "--deadline", "28801", "--lang", "w+"]);
    assert_eq!(code(&none), 2);
}

#[test]
fn seeded_commands_repeat() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["synth-training", "--seed", "9", "--n", "400"][..],
        &["synth-profiles", "--seed", "9", "--n", "40"][..],
    ] {
        let read = |args: &[&str]| {
            ok(d.path(), &[args, &["--out", "x.csv"]].concat());
            std::fs::read(d.path().join("x.csv")).unwrap()
        };
        let a = read(args);
        assert!(a.starts_with(b"# seed=9\n"));
        assert_eq!(a, read(args));
        let mut other = args.to_vec();
        other[2] = "10";
        assert_ne!(a, read(&other));
    }
}

#[test]
fn eval_forest_layout() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth-training", "--seed", "3", "--n", "600", "--out", "t.csv"]);
    ok(d.path(), &["train-forest", "--data", "t.csv", "--target", "category", "--seed", "3", "--out", "f.json"]);
    let out = String::from_utf8(ok(d.path(), &["eval-forest", "--model", "f.json", "--data", "t.csv", "--seed", "4"])).unwrap();
    let (scores, importance) = out.split_once("\n\n").unwrap();
    let mut lines = scores.lines();
    assert_eq!(lines.next(), Some("# seed=4"));
    assert_eq!(lines.next(), Some("label,forest,most_frequent,weighted_random,support"));
    assert!(scores.lines().last().unwrap().starts_with("weighted,"));
    assert!(importance.starts_with("feature,importance\n"));
    let values: Vec<f64> = importance.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-5);
}
