use std::path::Path;
use std::process::{Command, Output};

use agebench_cli::output::{read_csv, split, BudgetSweepRow, ComparisonRow, TidyRow};
use agebench_cli::ExperimentSpec;
use serde_json::Value;

fn agebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agebench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = agebench(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_spec(dir: &Path, text: &str) -> String {
    let p = dir.join("spec.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_SIM: &str = r#"{
  "schema": 1,
  "name": "small",
  "system": {"rates": [0.2, 0.4], "service": {"kind": "deterministic", "mu": 1}},
  "simulate": {
    "thresholds": {"start": 2, "stop": 12, "step": 2},
    "config": {"target_delivered_updates": 100000, "sampled_moments": 1000},
    "replications": REPS,
    "threads": THREADS
  }
}"#;

fn small_sim(reps: usize, threads: usize) -> String {
    SMALL_SIM
        .replace("REPS", &reps.to_string())
        .replace("THREADS", &threads.to_string())
}

#[test]
fn fig3_analysis_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["analyze", "--preset", "fig3", "--out", out.to_str().unwrap()]);
    let m: Vec<TidyRow> = read_csv(&out.join("analyze_M.csv")).unwrap();
    let d: Vec<TidyRow> = read_csv(&out.join("analyze_D.csv")).unwrap();
    let find = |rows: &[TidyRow], method: &str, source: usize, metric: &str, x: f64| {
        rows.iter()
            .find(|r| r.method == method && r.source == source && r.metric == metric && r.threshold == x)
            .unwrap()
            .value
    };
    assert!((find(&m, "closed", 1, "AoI", 8.0) - 0.3696).abs() < 1e-4);
    assert!((find(&m, "closed", 1, "AoI", 8.0) - find(&m, "general", 1, "AoI", 8.0)).abs() < 1e-6);
    for rows in [&m, &d] {
        assert!(rows.iter().filter(|r| r.threshold == 0.0).all(|r| r.value == 1.0));
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.value) && r.ci_halfwidth.is_none()));
    }
    for r in d.iter().filter(|r| r.threshold >= 2.0) {
        let exp = find(&m, "closed", r.source, &r.metric, r.threshold);
        assert!(r.value >= exp, "{r:?} below exponential {exp}");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "analyze");
    assert_eq!(manifest["files"].as_array().unwrap().len(), 6);
}

#[test]
fn simulation_agrees_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &small_sim(1, 1));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&["simulate", "--spec", &spec, "--out", a.to_str().unwrap(), "--seed", "1"]);
    run_ok(&["simulate", "--spec", &spec, "--out", b.to_str().unwrap(), "--seed", "1"]);
    for f in ["simulate.json", "simulate_D.csv", "comparison_D.csv", "run.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(summary["agreement"], true);
    let cmp: Vec<ComparisonRow> = read_csv(&a.join("comparison_D.csv")).unwrap();
    assert_eq!(cmp.len(), 2 * 2 * 6);
    assert!(cmp.iter().all(|c| !c.flagged && c.z <= 3.0));
    let sim: Vec<TidyRow> = read_csv(&a.join("simulate_D.csv")).unwrap();
    assert!(sim.iter().all(|r| r.method == "sim" && r.ci_halfwidth.unwrap() >= 0.0));
    // deterministic service makes every peak age at least 2
    let certain = sim.iter().find(|r| r.metric == "PAoI" && r.threshold == 2.0).unwrap();
    assert_eq!((certain.value, certain.ci_halfwidth), (1.0, Some(0.0)));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_spec(dir.path(), &small_sim(3, 1));
    let a = dir.path().join("a");
    run_ok(&["simulate", "--spec", &one, "--out", a.to_str().unwrap()]);
    let three = write_spec(dir.path(), &small_sim(3, 3));
    let b = dir.path().join("b");
    run_ok(&["simulate", "--spec", &three, "--out", b.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(a.join("simulate.json")).unwrap(),
        std::fs::read(b.join("simulate.json")).unwrap()
    );
}

#[test]
fn disagreement_exits_after_writing_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_sim(1, 1).replace("\"threads\": 1", "\"threads\": 1, \"max_z\": 1e-9");
    let spec = write_spec(dir.path(), &text);
    let out = dir.path().join("out");
    let res = agebench(&["simulate", "--spec", &spec, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
    assert!(out.join("comparison_D.csv").exists() && out.join("run.json").exists());
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(summary["agreement"], false);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let zero = small_sim(1, 1).replace("100000", "0");
    let spec = write_spec(dir.path(), &zero);
    assert_eq!(agebench(&["simulate", "--spec", &spec, "--out", out]).status.code(), Some(2));

    let unknown = small_sim(1, 1).replace("\"name\"", "\"colour\": 1, \"name\"");
    let spec = write_spec(dir.path(), &unknown);
    assert_eq!(agebench(&["simulate", "--spec", &spec, "--out", out]).status.code(), Some(2));

    let negative = r#"{"schema":1,"system":{"rates":[-0.2,0.4],"service":{"kind":"exponential","mu":1}}}"#;
    let spec = write_spec(dir.path(), negative);
    assert_eq!(agebench(&["analyze", "--spec", &spec, "--out", out]).status.code(), Some(2));

    let no_section = r#"{"schema":1}"#;
    let spec = write_spec(dir.path(), no_section);
    assert_eq!(agebench(&["optimize", "--spec", &spec, "--out", out]).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    let res = agebench(&["analyze", "--spec", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(res.status.code(), Some(1));

    assert_eq!(agebench(&["analyze", "--out", out]).status.code(), Some(2));
    assert_eq!(agebench(&["analyze", "--preset", "fig9", "--out", out]).status.code(), Some(2));
}

#[test]
fn fig4_symmetric_thresholds_split_evenly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["optimize", "--preset", "fig4", "--out", out.to_str().unwrap()]);
    let entries: Value = serde_json::from_str(&std::fs::read_to_string(out.join("optimize.json")).unwrap()).unwrap();
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for e in entries {
        assert!(e["solver_gap"].as_f64().unwrap() < 1e-6);
        let rates: Vec<f64> = e["results"][0]["rates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let w: Vec<f64> = e["thresholds"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        if w[0] == w[1] {
            assert!((rates[0] - 0.4).abs() < 1e-9 && (rates[1] - 0.4).abs() < 1e-9);
        } else {
            // the source with the tighter threshold gets more rate
            assert_eq!(rates[0] > rates[1], w[0] < w[1]);
        }
    }
    assert!(out.join("optimize_sweep.csv").exists());
}

#[test]
fn fig6_optimal_against_equal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["sweep", "--preset", "fig6", "--out", out.to_str().unwrap()]);
    let rows: Vec<BudgetSweepRow> = read_csv(&out.join("sweep.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 19 * 2);
    let pick = |t: &str, total: f64, alloc: &str| {
        rows.iter()
            .find(|r| r.thresholds == t && r.total_rate == total && r.allocation == alloc)
            .unwrap()
            .clone()
    };
    for k in 2..=20 {
        let total = k as f64 / 10.0;
        let (o, e) = (pick("7.5;7.5", total, "optimal"), pick("7.5;7.5", total, "equal"));
        assert!((o.objective - e.objective).abs() < 1e-9);
        let (o, e) = (pick("2;13", total, "optimal"), pick("2;13", total, "equal"));
        assert!(o.objective < e.objective, "total {total}");
        let rates = split(&o.rates).unwrap();
        assert!((rates.iter().sum::<f64>() - total).abs() < 1e-12);
    }
}

#[test]
fn preset_command_prints_a_loadable_spec() {
    let out = agebench(&["preset", "fig5"]);
    assert!(out.status.success());
    let spec = ExperimentSpec::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(spec.name.as_deref(), Some("fig5"));
    assert!(spec.sweep.is_some());
}
