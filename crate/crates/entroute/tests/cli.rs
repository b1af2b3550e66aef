use std::path::PathBuf;
use std::process::{Command, Output};

use entroute::{run_experiment, Algorithm, ExperimentConfig, Sweep, SweepParam, TopologySettings};

fn entroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_route_validate() {
    let dir = scratch("pipeline");
    let inst = dir.join("instance.json");
    let inst_s = inst.to_str().unwrap();
    ok(&entroute(&[
        "generate", "--num-switches", "20", "--num-pairs", "5", "--avg-degree", "6", "--seed", "3",
        "--out", inst_s,
    ]));

    for algo in ["multi_r", "alg4_direct", "fer", "qpass", "b1"] {
        let plan = dir.join(format!("{algo}.json"));
        let plan_s = plan.to_str().unwrap();
        ok(&entroute(&["route", "--instance", inst_s, "--algorithm", algo, "--out", plan_s]));
        let report = ok(&entroute(&[
            "validate", "--instance", inst_s, "--plan", plan_s, "--trials", "20000",
        ]));
        let v: serde_json::Value = serde_json::from_str(&report).unwrap();
        let analytic = v["expected_throughput"].as_f64().unwrap();
        let mc = v["mc_throughput"].as_f64().unwrap();
        let se = v["mc_stderr"].as_f64().unwrap();
        assert!((mc - analytic).abs() <= 5.0 * se + 1e-12, "{algo}: {mc} vs {analytic}");
    }

    let catalog = ok(&entroute(&["catalog", "--instance", inst_s]));
    let c: serde_json::Value = serde_json::from_str(&catalog).unwrap();
    assert_eq!(c["pairs"].as_array().unwrap().len(), 5);
    let lp = ok(&entroute(&["catalog", "--instance", inst_s, "--lp"]));
    assert!(lp.starts_with("maximize"), "{lp}");
}

#[test]
fn generation_is_reproducible() {
    let a = ok(&entroute(&["generate", "--num-switches", "15", "--num-pairs", "4", "--seed", "9"]));
    let b = ok(&entroute(&["generate", "--num-switches", "15", "--num-pairs", "4", "--seed", "9"]));
    assert_eq!(a, b);
}

#[test]
fn errors_are_one_json_line_with_failure_status() {
    let out = entroute(&["route", "--instance", "/nonexistent/x.json", "--algorithm", "fer"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    let v: serde_json::Value = serde_json::from_str(&err).unwrap();
    assert_eq!(v["error"], "io");

    let out = entroute(&["generate", "--swap-prob", "1.5"]);
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["error"], "invalid-argument");
}

#[test]
fn experiment_csv_from_cli() {
    let csv = ok(&entroute(&[
        "experiment", "--num-switches", "15", "--num-pairs", "4", "--avg-degree", "6", "--seeds", "0,1",
        "--algorithms", "fer,multi_r", "--sweep-param", "num_pairs", "--sweep-values", "3,4",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], entroute::CSV_HEADER.join(","));
    // 2 points x 2 algorithms x (2 seeds + mean)
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1].starts_with("num_pairs,3,multi_r,0,"), "{}", lines[1]);
    assert!(lines[3].starts_with("num_pairs,3,multi_r,mean,"), "{}", lines[3]);
}

#[test]
fn pair_sweep_keeps_multi_r_ahead_of_fer_on_served_pairs() {
    let config = ExperimentConfig {
        base: TopologySettings::default(),
        sweep: Some(Sweep {
            param: SweepParam::NumPairs,
            values: vec![10.0, 20.0, 30.0],
        }),
        seeds: (0..3).collect(),
        algorithms: vec![Algorithm::MultiR, Algorithm::Fer],
        ..ExperimentConfig::default()
    };
    let table = run_experiment(&config).unwrap();
    for m in [10.0, 20.0, 30.0] {
        let mr = table.mean_of(Some(m), Algorithm::MultiR).unwrap();
        let fer = table.mean_of(Some(m), Algorithm::Fer).unwrap();
        assert!(mr.served_pairs >= fer.served_pairs, "M = {m}");
    }
    assert_eq!(
        table.to_csv().unwrap(),
        run_experiment(&config).unwrap().to_csv().unwrap()
    );
}
