//! End-to-end checks of the binary: subcommand round trips, exit codes,
//! output formats, and reproducibility through the process boundary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nc-geom"));
    // tests must not inherit a thread override from the environment
    cmd.env_remove("NC_GEOM_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code; killed by signal?")
}

#[test]
fn gen_then_analyze_round_trips_through_topology_json() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("cell.json");

    let gen = run(&["gen", "--kind", "uniform", "--n", "30", "--seed", "7", "--out"])
        .status
        .code();
    assert_eq!(gen, Some(2), "--out without a value is a usage error");

    let gen = run(&[
        "gen", "--kind", "uniform", "--n", "30", "--seed", "7",
        "--out", topo.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0, "stderr: {}", stderr(&gen));
    assert!(topo.exists());

    let direct = run(&["analyze", "--topology", topo.to_str().unwrap()]);
    assert_eq!(code(&direct), 0, "stderr: {}", stderr(&direct));
    let line = stdout(&direct);
    assert!(line.contains("c_max = "), "got: {line}");

    // dumping to stdout and loading that file must agree with --out
    let dump = run(&["gen", "--kind", "uniform", "--n", "30", "--seed", "7", "--dump-topology"]);
    assert_eq!(code(&dump), 0);
    assert_eq!(stdout(&dump), std::fs::read_to_string(&topo).unwrap());
}

#[test]
fn grid_analysis_reports_known_maxima() {
    for (n, want) in [("49", "c_max = 6"), ("81", "c_max = 8")] {
        let out = run(&["analyze", "--grid", "square", "--n", n]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        assert!(stdout(&out).contains(want), "n={n}: {}", stdout(&out));
    }
}

#[test]
fn analysis_witness_file_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("witness.json");
    let out = run(&[
        "analyze", "--grid", "square", "--n", "49",
        "--witness", witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!(parsed["max_number"], serde_json::json!(6));
    assert_eq!(parsed["flows"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes_follow_the_contract() {
    // 2: flag and input mistakes
    assert_eq!(code(&run(&["analyze", "--frobnicate"])), 2);
    assert_eq!(code(&run(&["gen", "--kind", "banana", "--n", "10"])), 2);
    assert_eq!(code(&run(&["gen", "--kind", "square"])), 2, "needs --d or --n");
    assert_eq!(code(&run(&["rates", "--rates", "1,-3"])), 2);
    assert_eq!(code(&run(&["analyze", "--grid", "square", "--n", "50"])), 2, "unattainable count");

    // 1: runtime failures
    let out = run(&["analyze", "--topology", "/no/such/file.json"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));

    // 0: a working invocation
    assert_eq!(code(&run(&["bounds", "--d", "0.1"])), 0);
}

#[test]
fn malformed_experiment_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let out = run(&["experiment", "--config", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"experiment":"grid-sweep","n_values":[13],"frobnicate":1}"#)
        .unwrap();
    let out = run(&["experiment", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));

    let badkind = dir.path().join("badkind.json");
    std::fs::write(&badkind, r#"{"experiment":"moon-phase","n_values":[13]}"#).unwrap();
    let out = run(&["experiment", "--config", badkind.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("grid-sweep"), "error should list the allowed experiments");
}

#[test]
fn rates_table_prints_expected_gains() {
    let out = run(&["rates", "--rates", "1,1,1,1", "--m", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for want in
        ["rate_without = 1.00000", "rate_nc = 4.00000", "gain = 4.00000", "gain_m_2 = 2.00000"]
    {
        assert!(text.contains(want), "missing {want:?} in: {text}");
    }

    let out = run(&["rates", "--rates", "2,1", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["rate_without"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["rate_nc"], serde_json::json!(2.0));
    assert_eq!(v["gain"], serde_json::json!(1.5));
}

#[test]
fn schedule_json_is_machine_readable() {
    let out = run(&["schedule", "--pairs", "6", "--seed", "3", "--cap", "2", "--json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["gain"].as_f64().unwrap() >= 1.0);
    assert!(v["slots_with_nc"].as_u64().unwrap() <= v["slots_without_nc"].as_u64().unwrap());
    for group in v["groups"].as_array().unwrap() {
        assert!(group.as_array().unwrap().len() <= 2);
    }

    // identical invocations give identical bytes
    let again = run(&["schedule", "--pairs", "6", "--seed", "3", "--cap", "2", "--json"]);
    assert_eq!(out.stdout, again.stdout);
}

fn experiment_args(out: Option<&Path>) -> Vec<String> {
    let mut args: Vec<String> = [
        "experiment", "--experiment", "random-mean", "--n-values", "10,20",
        "--trials", "60", "--base-seed", "5",
    ]
    .map(str::to_string)
    .to_vec();
    if let Some(path) = out {
        args.push("--out".into());
        args.push(path.to_str().unwrap().into());
    }
    args
}

#[test]
fn experiment_outputs_are_byte_identical_across_runs() {
    let first = bin().args(experiment_args(None)).output().unwrap();
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let second = bin().args(experiment_args(None)).output().unwrap();
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.starts_with("n,statistic,value,stderr,trials\n"), "got: {text}");
    assert!(text.contains("10,mean_c_max,"));

    // file output adds a metadata sidecar; both must also reproduce
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let meta = dir.path().join("run.meta.json");
    let out = bin().args(experiment_args(Some(&csv))).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);
    let first_meta = std::fs::read_to_string(&meta).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&first_meta).unwrap();
    assert_eq!(parsed["config"]["base_seed"], serde_json::json!(5));

    let csv2 = dir.path().join("again.csv");
    let out = bin().args(experiment_args(Some(&csv2))).output().unwrap();
    assert_eq!(code(&out), 0);
    let second_meta = std::fs::read_to_string(dir.path().join("again.meta.json")).unwrap();
    assert_eq!(first_meta, second_meta);
}

#[test]
fn experiment_flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment":"bounds-table","d_values":[0.1],"n_values":[10]}"#)
        .unwrap();

    let out = run(&["experiment", "--config", cfg.to_str().unwrap(), "--d-values", "0.3"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("0,d,0.3,"), "flag value should be used: {text}");
    assert!(!text.contains("0,d,0.1,"), "config value should be overridden: {text}");
}

#[cfg(unix)]
#[test]
fn closed_pipe_kills_the_process_quietly() {
    // a pitch-0.02 grid dumps far more JSON than a pipe buffers, so head
    // closing early must end the process without a panic trace
    let pipeline = format!(
        "{} gen --kind square --d 0.02 --dump-topology | head -c 100 >/dev/null",
        env!("CARGO_BIN_EXE_nc-geom")
    );
    let out = Command::new("sh").args(["-c", &pipeline]).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(!stderr(&out).contains("panicked"), "stderr: {}", stderr(&out));
}

#[test]
fn thread_override_is_validated() {
    let ok = bin()
        .env("NC_GEOM_THREADS", "1")
        .args(["rates", "--rates", "1,2,3"])
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0, "stderr: {}", stderr(&ok));

    let bad = bin()
        .env("NC_GEOM_THREADS", "frog")
        .args(["rates", "--rates", "1,2,3"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("NC_GEOM_THREADS"), "stderr: {}", stderr(&bad));
}
