use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn gavf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gavf"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate() {
    let ok = gavf(&["validate", path(&fixture("flight.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("\"acyclic\": true"));
    let cyclic = gavf(&["validate", path(&fixture("bad_cycle.json"))]);
    assert_eq!(cyclic.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&cyclic.stderr).contains("cycle"));
}

#[test]
fn compile_then_rank() {
    let dir = tempfile::tempdir().unwrap();
    let vf = dir.path().join("vf.json");
    let out = gavf(&["compile", path(&fixture("flight.json")), "-o", path(&vf)]);
    assert_eq!(out.status.code(), Some(0));
    let v = gavf_core::ranking::GaValueFunction::parse_json(&std::fs::read_to_string(&vf).unwrap())
        .unwrap();
    assert_eq!(v.entry_count(), 24);

    let ranked = gavf(&["rank", path(&vf), path(&fixture("flights.csv")), "-k", "10"]);
    assert_eq!(ranked.status.code(), Some(0));
    let text = stdout(&ranked);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[0], (i + 1).to_string());
        gavf_core::ranking::parse_number(fields[2]).unwrap();
    }
}

#[test]
fn random_vertex_policy() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let vf = dir.path().join(name);
        let out = gavf(&[
            "compile",
            path(&fixture("flight.json")),
            "-o",
            path(&vf),
            "--policy",
            "random-vertex",
            "--seed",
            seed,
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read_to_string(vf).unwrap()
    };
    assert_eq!(run("3", "a.json"), run("3", "b.json"));
    assert_ne!(run("3", "a.json"), run("4", "c.json"));
}

#[test]
fn domain_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let vf = dir.path().join("vf.json");
    let out = gavf(&[
        "compile",
        path(&fixture("selector_cycle.json")),
        "-o",
        path(&vf),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconsistent"));
    assert!(!vf.exists());
    let out = gavf(&["compile", path(&fixture("bad_cycle.json")), "-o", path(&vf)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(gavf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        gavf(&["compile", path(&fixture("flight.json"))])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gavf(&[
            "oracle",
            path(&fixture("flight.json")),
            "--pairs",
            "--consistent"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        gavf(&["validate", "/nonexistent/net.json"]).status.code(),
        Some(1)
    );
    assert_eq!(gavf(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle() {
    let out = gavf(&["oracle", path(&fixture("bad_cycle.json")), "--consistent"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("inconsistent"));
    let out = gavf(&["oracle", path(&fixture("flight.json")), "--consistent"]);
    assert_eq!(
        (out.status.code(), stdout(&out).trim()),
        (Some(0), "consistent")
    );
    let out = gavf(&["oracle", path(&fixture("flight.json")), "--pairs"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let first = text.lines().next().unwrap();
    assert_eq!(first.split('\t').count(), 2);
    assert!(first.starts_with("D="));
    let pairs = text.lines().count();
    let net =
        gavf_core::model::parse_net_json(&std::fs::read_to_string(fixture("flight.json")).unwrap())
            .unwrap();
    assert_eq!(
        pairs,
        gavf_core::oracle::all_entailed_pairs(&net, 4096)
            .unwrap()
            .len()
    );
}

#[test]
fn simulate_writes_stats_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let mut config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("simulate.json")).unwrap()).unwrap();
    config["runs"] = 8.into();
    config["items"] = 40.into();
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, config.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = gavf(&[
        "simulate",
        "--config",
        path(&config_path),
        "--out",
        path(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stats: gavf_core::simulation::ExperimentStats =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(stats.runs, 8);
    let histogram = std::fs::read_to_string(out_dir.join("histogram.txt")).unwrap();
    assert_eq!(histogram, stats.histogram_text());

    std::fs::write(&config_path, r#"{"runs": 1}"#).unwrap();
    let out = gavf(&[
        "simulate",
        "--config",
        path(&config_path),
        "--out",
        path(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
