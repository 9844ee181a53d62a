use std::path::Path;
use std::process::{Command, Output};

use carleman_lab::harness::{parse_config, read_csv, Command as Experiment, ExperimentConfig};
use proptest::prelude::*;

fn lab(args: &[&str], threads_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carleman-lab"));
    cmd.args(args).env_remove("CARLEMAN_LAB_THREADS");
    if let Some(t) = threads_env {
        cmd.env("CARLEMAN_LAB_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const IDENTITIES: &str = "command = \"verify-identities\"\n[grid]\nn = [4, 8]\n[ensemble]\nsamples = 5\n";

#[test]
fn writes_csv_with_provenance_header_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), IDENTITIES);
    let out = dir.path().join("out");
    let o = lab(&["verify-identities", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"], Some("2"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("verify-identities.csv")).unwrap();
    let (header, columns, rows) = read_csv(&text).unwrap();
    assert!(header[0].starts_with("carleman-lab "));
    assert!(header.iter().any(|l| l == "command: verify-identities"));
    assert!(header.iter().any(|l| l == "master_seed: 11"));
    let hash = header.iter().find_map(|l| l.strip_prefix("config_sha256: ")).unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(columns, ["n", "identity", "pairs", "max_residual"]);
    assert!(!rows.is_empty());

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["threads"], 2);
}

#[test]
fn bad_config_lists_every_problem_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "command = \"simulate\"\n[grid]\nlength = -1.0\n[ensemble]\nsamples = 0\nbogus = 3\n");
    let out = dir.path().join("never");
    let o = lab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["grid.length", "ensemble.samples", "ensemble.bogus"] {
        assert!(err.contains(key), "missing {key} in: {err}");
    }
    assert!(!out.exists());
}

#[test]
fn command_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), IDENTITIES);
    let o = lab(&["cauchy", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("verify-identities"));
}

#[test]
fn missing_config_file_exits_one() {
    let o = lab(&["simulate", "--config", "/nonexistent/run.toml"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "command = \"simulate\"\n[grid]\nn = 7\n[time]\nhorizon = 0.05\n[problem]\nc = 1.0\n[ensemble]\nsamples = 300\n",
    );
    let mut bodies = Vec::new();
    for t in ["1", "3"] {
        let out = dir.path().join(t);
        let o = lab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()], Some(t));
        assert!(o.status.success());
        let text = std::fs::read_to_string(out.join("simulate.csv")).unwrap();
        bodies.push(carleman_lab::harness::csv_body(&text).to_string());
    }
    assert_eq!(bodies[0], bodies[1]);
}

fn command_strategy() -> impl Strategy<Value = Experiment> {
    prop::sample::select(Experiment::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn configs_survive_a_toml_round_trip(
        cmd in command_strategy(),
        samples in 1usize..5000,
        seed in 0u64..(i64::MAX as u64),
        horizon in 0.05f64..4.0,
        c in -3.0f64..3.0,
        x_left in 0.05f64..0.95,
    ) {
        let mut cfg = parse_config(&ExperimentConfig::defaults(cmd).to_toml()).unwrap();
        cfg.ensemble.samples = samples;
        cfg.ensemble.master_seed = seed;
        cfg.time.horizon = horizon;
        cfg.problem.c = c;
        cfg.cauchy.x_left = x_left;
        match parse_config(&cfg.to_toml()) {
            Ok(back) => prop_assert_eq!(back, cfg),
            // a perturbed field may be out of range for this command; that
            // must be reported, never silently altered
            Err(e) => prop_assert_eq!(e.exit_code(), 1),
        }
    }
}
