use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_approval-committee");

const SMALL: &str = r#"m = 6
n = 3
k = 3
t = 6
rho = "1/3"
p = 0.7
p_h = 0.75
p_m = 0.5
sigma = 0.1
strategy = { kind = "threshold", z = 0.5 }
sweep = { axis = "threshold-z", from = 0.3, to = 0.7, step = 0.2 }
engine = "exact"
trials = 2000
seed = 4
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = run(dir.path(), &["--config", &cfg, "--out", "res.csv", "sweep"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("res.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("axis,axis_value,m,n,k,t,rho"));
    assert_eq!(lines.count(), 3);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res.json")).unwrap()).unwrap();
    assert_eq!(sidecar["base"]["seed"], 4);
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL
            .replace("\"threshold\", z = 0.5", "\"cardinal\", z = 2")
            .replace(
                "axis = \"threshold-z\", from = 0.3, to = 0.7, step = 0.2",
                "axis = \"cardinal-z\", from = 1, to = 3, step = 1",
            )
            .replace("engine = \"exact\"", "engine = \"mc\""),
    );
    let one = run(dir.path(), &["--config", &cfg, "--threads", "1", "simulate"]);
    let four = run(dir.path(), &["--config", &cfg, "--threads", "4", "simulate"]);
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let reseeded = run(dir.path(), &["--config", &cfg, "--seed", "5", "simulate"]);
    assert_ne!(one.stdout, reseeded.stdout);
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("k = 3", "k = 9"));
    let out = run(dir.path(), &["--config", &cfg, "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("m ≥ k"), "{err}");

    let cfg = write_config(dir.path(), &format!("{SMALL}colour = 1\n"));
    let out = run(dir.path(), &["--config", &cfg, "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn exact_engine_refuses_cardinal_ballots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL.replace("\"threshold\", z = 0.5", "\"cardinal\", z = 2").replace(
            "sweep = { axis = \"threshold-z\", from = 0.3, to = 0.7, step = 0.2 }\n",
            "",
        ),
    );
    let out = run(dir.path(), &["--config", &cfg, "success-exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn lottery_prints_exact_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["lottery", "--p", "0.8", "--k", "1500", "--elections", "200000000"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let failure: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("exact_failure="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(failure < 1e-12);
    assert!(text.contains("chernoff_success=") && text.contains("lifetime_failure_bound="));

    let out = run(
        dir.path(),
        &["lottery", "--p", "0.8", "--k", "10", "--rho", "one third"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_rejects_unknown_figures_and_writes_known_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["reproduce", "fig-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("threshold-few-voters"));

    let out = run(dir.path(), &["reproduce", "threshold-few-voters"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out/threshold-few-voters.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 99);
    assert!(dir.path().join("out/threshold-few-voters.json").exists());
}

#[test]
fn posterior_maps_signals_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "posterior",
            "--p",
            "0.75",
            "--p-h",
            "0.75",
            "--p-m",
            "0.5",
            "--sigma",
            "0.1",
            "0.4",
            "0.6",
            "0.8",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let values: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
}
