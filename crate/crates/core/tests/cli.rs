//! End-to-end checks of the `carnot-flow` binary: exit codes, diagnostics
//! and the CSV/NDJSON artifacts consumed by the plotting scripts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use carnot_flow::cli::{self, ExperimentConfig};
use carnot_flow::molecules::EvolutionRecord;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carnot-flow"))
}

fn run_config(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    bin().arg("run").arg(&cfg).arg("--out").arg(&out).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SIMULATE: &str = r#"
scenario = "simulate"
seed = 5
snapshots = true
[solver]
horizon = 0.1
window = 0.05
[velocity]
kind = "cellular"
amplitude = 0.5
modes = 1
[initial]
kind = "random"
low = 0.0
high = 1.0
"#;

const MOLECULES: &str = r#"
scenario = "molecule-run"
[grid]
group = "euclidean"
extents = [8.0]
counts = [1024]
[velocity]
kind = "constant"
components = [0.5]
[molecule_run]
t0 = 0.2
[[molecules]]
r = 0.2
[[molecules]]
r = 0.1
"#;

#[test]
fn group_verify_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario = \"group-verify\"\nseed = 3\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS associativity"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn malformed_config_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario = \"simulate\"\n[grid]\ncounts = [16, \n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "parse");
    assert!(err["message"].as_str().unwrap().contains("line"), "{err}");

    let o = run_config(dir.path(), "scenario = \"simulate\"\n[solver]\nhorizn = 1.0\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizn"), "{}", stderr(&o));

    let o = run_config(dir.path(), "scenario = \"no-such-thing\"\n", &[]);
    assert_eq!(o.status.code(), Some(2));

    let o = run_config(dir.path(), "scenario = \"simulate\"\n[initial]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = -1.0\n", &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = bin().args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one_and_runtime_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = \"holder-test\"\n[grid]\ngroup = \"euclidean\"\nextents = [8.0]\ncounts = [64]\n[solver]\nhorizon = 0.05\nwindow = 0.05\n[holder]\ntolerance = 0.0\nsamples = 50\n";
    let o = run_config(dir.path(), text, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL holder-stability"));
    let v = fs::read_to_string(dir.path().join("out/verdicts.ndjson")).unwrap();
    let line: serde_json::Value = serde_json::from_str(v.lines().next().unwrap()).unwrap();
    assert_eq!(line["pass"], false);

    let cfg = dir.path().join("config.toml");
    fs::write(&cfg, "scenario = \"group-verify\"\n").unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = bin().arg("run").arg(&cfg).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "runtime");
}

#[test]
fn describe_lists_anchors_and_files() {
    for s in cli::Scenario::ALL {
        let o = bin().args(["describe", s.name()]).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert!(text.starts_with(s.name()));
        assert!(text.contains("anchors:") && text.contains("verdicts.ndjson"), "{text}");
    }
    let text = stdout(&bin().args(["describe", "molecule-run"]).output().unwrap());
    assert!(text.contains("envelopes.csv") && text.contains("molecule conditions"));
    let o = bin().args(["describe", "bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("group-verify"));
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_artifacts_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), SIMULATE, &["--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    let mut lines = norms.lines();
    assert_eq!(lines.next().unwrap(), "t,L1,L2,L4,Linf,boundary_mass,picard_iters");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 3);
    assert!(rows.iter().all(|r| r.len() == 7));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows.last().unwrap()[0] - 0.1).abs() < 1e-12);
    assert!(fs::metadata(out.join("snapshots.bin")).unwrap().len() > 0);
    for l in fs::read_to_string(out.join("verdicts.ndjson")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        for key in ["check", "pass", "metric", "tolerance", "scenario", "details"] {
            assert!(v.get(key).is_some(), "{key} missing in {l}");
        }
        assert_eq!(v["scenario"], "simulate");
    }
    // The resolved config reproduces the run.
    let resolved = ExperimentConfig::parse(&fs::read_to_string(out.join("config.resolved.toml")).unwrap()).unwrap();
    let mut original = ExperimentConfig::parse(SIMULATE).unwrap();
    original.output = Some(out.clone());
    assert_eq!(resolved, original);
}

#[test]
fn seed_override_changes_random_data_only() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        fs::create_dir_all(&d).unwrap();
        let o = run_config(&d, SIMULATE, &["--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(d.join("out/norms.csv")).unwrap()
    };
    let a = read("1", "a");
    let b = read("1", "b");
    let c = read("2", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn molecule_run_writes_envelope_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), MOLECULES, &[]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let out = dir.path().join("out");
    let env = fs::read_to_string(out.join("envelopes.csv")).unwrap();
    let mut lines = env.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, EvolutionRecord::<f64>::CSV_HEADER);
    let cols: Vec<&str> = header.split(',').collect();
    let col = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == cols.len()));
    for r in [0.2, 0.1] {
        let mine: Vec<_> = rows.iter().filter(|row| row[col("r")].parse::<f64>().unwrap() == r).collect();
        assert!(!mine.is_empty());
        let last: f64 = mine.last().unwrap()[col("elapsed")].parse().unwrap();
        assert!(last >= 0.2 - 1e-12);
        assert!(mine.iter().all(|row| row[col("pass")] == "true"));
    }
    assert_eq!(rows.iter().filter(|r| r[col("stage")] == "0").count(), 2);
    let mol = fs::read_to_string(out.join("molecules.csv")).unwrap();
    assert_eq!(mol.lines().count(), 3);
    let corona = fs::read_to_string(out.join("corona.csv")).unwrap();
    assert!(corona.starts_with("r,radius,i1,i2,reference"));
    assert_eq!(corona.lines().count(), 3);
    assert!(stdout(&o).contains("PASS envelopes r=0.1"));
}

#[test]
fn every_shipped_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = Vec::new();
    for e in fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            let cfg = ExperimentConfig::parse(&fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(p.file_stem().unwrap().to_str().unwrap(), cfg.scenario.name());
            seen.push(cfg.scenario);
        }
    }
    for s in cli::Scenario::ALL {
        assert!(seen.contains(&s), "no config for {}", s.name());
    }
}
