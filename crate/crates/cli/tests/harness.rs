//! Integration tests for the harness commands and the binary's exit
//! codes.

use std::path::Path;
use std::process::Command;

use ogmc_cli::commands::{cmd_compare, cmd_gen, cmd_run, GenManifest};
use ogmc_cli::config::{Dataset, ExperimentConfig, TrackerKind};

fn small_netflix(seed: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig {
        seed,
        rank: 4,
        lambda1: 0.1,
        lambda2: 0.5,
        ..ExperimentConfig::default()
    };
    config.netflix.users = 30;
    config.netflix.movies = 50;
    config.netflix.user_communities = 5;
    config.netflix.movie_communities = 10;
    config
}

#[test]
fn gen_manifest_round_trips_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_netflix(3);
    config.out = Some(dir.path().join("ds"));
    cmd_gen(&config).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ds/manifest.toml")).unwrap();
    let manifest: GenManifest = toml::from_str(&text).unwrap();
    assert_eq!(manifest.config, config);
    for file in ["data.csv", "truth.csv", "graph.txt"] {
        assert!(dir.path().join("ds").join(file).exists(), "{file} missing");
    }
}

#[test]
fn gen_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = small_netflix(11);
    first.out = Some(dir.path().join("a"));
    cmd_gen(&first).unwrap();
    let mut second = small_netflix(11);
    second.out = Some(dir.path().join("b"));
    cmd_gen(&second).unwrap();
    for file in ["data.csv", "truth.csv", "graph.txt"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical seeds");
    }
}

#[test]
fn gen_records_planted_outlier_support() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig {
        dataset: Dataset::Continuous,
        out: Some(dir.path().join("ds")),
        ..ExperimentConfig::default()
    };
    config.continuous.rows = 40;
    config.continuous.cols = 60;
    config.continuous.rank = 4;
    config.continuous.outlier_density = 0.01;
    let outcome = cmd_gen(&config).unwrap();
    let expected = (0.01_f64 * 40.0 * 60.0).round() as usize;
    assert_eq!(outcome.manifest.generated.outlier_support, Some(expected));
}

#[test]
fn gen_rejects_traffic_dataset() {
    let mut config = ExperimentConfig {
        dataset: Dataset::TrafficFile,
        out: Some("unused".into()),
        ..ExperimentConfig::default()
    };
    config.traffic.data = Some("x.csv".into());
    config.traffic.graph = Some("g.txt".into());
    assert_eq!(cmd_gen(&config).unwrap_err().exit_code(), 2);
}

#[test]
fn robust_with_zero_penalty_follows_the_online_trajectory() {
    let mut online = small_netflix(21);
    online.tracker = TrackerKind::Online;
    let mut robust = small_netflix(21);
    robust.tracker = TrackerKind::Robust;
    robust.lambda3 = 0.0;

    let a = cmd_run(&online).unwrap();
    let b = cmd_run(&robust).unwrap();
    assert_eq!(a.steps, 50);
    assert_eq!(a.steps, b.steps);
    for (t, (x, y)) in a.predictions.iter().zip(&b.predictions).enumerate() {
        let diff = (x - y).norm();
        assert!(diff <= 1e-8, "step {t}: trajectories diverge by {diff}");
    }
}

#[test]
fn traffic_run_accepts_and_records_lambda1() {
    let dir = tempfile::tempdir().unwrap();
    // Tiny recorded stream: 4 links, 30 steps of a smooth signal.
    let mut data = String::from("links 4\n");
    for t in 0..30 {
        let base = (t as f64 * 0.2).sin();
        data.push_str(&format!(
            "{t},{},{},{},{}\n",
            1.0 + base,
            2.0 + base,
            3.0 - base,
            4.0 - base
        ));
    }
    let data_path = dir.path().join("traffic.csv");
    std::fs::write(&data_path, data).unwrap();
    let graph_path = dir.path().join("graph.txt");
    std::fs::write(&graph_path, "nodes 4\n0 1 1.0\n1 2 1.0\n2 3 1.0\n").unwrap();

    let mut config = ExperimentConfig {
        dataset: Dataset::TrafficFile,
        lambda1: 0.1,
        lambda2: 0.5,
        rank: 2,
        missing: 0.3,
        out: Some(dir.path().join("run")),
        ..ExperimentConfig::default()
    };
    config.traffic.data = Some(data_path);
    config.traffic.graph = Some(graph_path);
    let outcome = cmd_run(&config).unwrap();
    assert_eq!(outcome.steps, 30);
    assert_eq!(outcome.manifest.config.lambda1, 0.1);

    let manifest_text = std::fs::read_to_string(dir.path().join("run/manifest.toml")).unwrap();
    assert!(manifest_text.contains("lambda1 = 0.1"));
    assert!(dir.path().join("run/results.csv").exists());
}

#[test]
fn run_results_are_byte_deterministic() {
    let config = small_netflix(31);
    let a = cmd_run(&config).unwrap();
    let b = cmd_run(&config).unwrap();
    assert_eq!(a.results_csv.as_bytes(), b.results_csv.as_bytes());

    let mut diag = small_netflix(31);
    diag.netflix.movies = 20;
    diag.diagnostics = true;
    let c = cmd_run(&diag).unwrap();
    let d = cmd_run(&diag).unwrap();
    assert_eq!(c.results_csv.as_bytes(), d.results_csv.as_bytes());
    assert!(c.results_csv.lines().next().unwrap().contains("c_hat"));
}

#[test]
fn compare_consumes_run_outputs_with_wall_times() {
    let dir = tempfile::tempdir().unwrap();
    let mut low = small_netflix(41);
    low.lambda2 = 1.0;
    low.out = Some(dir.path().join("smooth"));
    let mut none = small_netflix(41);
    none.tracker = TrackerKind::BaselineNograph;
    none.out = Some(dir.path().join("plain"));
    cmd_run(&low).unwrap();
    cmd_run(&none).unwrap();

    let rows = cmd_compare(&[
        dir.path().join("smooth/results.csv"),
        dir.path().join("plain/results.csv"),
    ])
    .unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].final_err_db <= rows[1].final_err_db);
    for row in &rows {
        assert!(
            row.wall_time_seconds.is_some(),
            "{} lost its manifest",
            row.name
        );
        assert!(row.steps_to_1db < 50);
    }
}

#[test]
fn sweep_selects_on_the_held_out_seed_deterministically() {
    let mut config = small_netflix(61);
    config.netflix.movies = 40;
    config.sweep.lambda2 = Some(vec![0.0, 1.0]);
    config.sweep.lambda3 = None;
    let first = ogmc_cli::cmd_sweep(&config).unwrap();
    let second = ogmc_cli::cmd_sweep(&config).unwrap();
    assert_eq!(
        first.rows, second.rows,
        "sweep must not depend on scheduling"
    );
    assert_eq!(first.rows.len(), 2);
    // Grid order is the cartesian order regardless of score.
    assert_eq!(first.rows[0].lambda2, 0.0);
    assert_eq!(first.rows[1].lambda2, 1.0);
    let best_score = first
        .rows
        .iter()
        .map(|r| r.final_err_db)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(first.best.final_err_db, best_score);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ogmc"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn binary_reports_config_errors_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    let missing = binary()
        .args(["run", "--config", "/nonexistent/x.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad_flag = binary().args(["run", "--missing", "1.5"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));

    let no_out = binary().args(["gen"]).output().unwrap();
    assert_eq!(no_out.status.code(), Some(2));

    let bad_key = write_config(dir.path(), "bad.toml", "lambduh = 3\n");
    let unknown = binary()
        .args(["run", "--config", bad_key.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn binary_reports_numerical_failures_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // A robust run whose outlier penalty is far below the noise scale:
    // the lasso keeps nearly every coordinate active and exhausts its
    // sweep budget, which must surface as a numerical failure naming the
    // step, not as a crash or a silent bad result.
    let config = write_config(
        dir.path(),
        "hard.toml",
        r#"
dataset = "continuous"
tracker = "robust"
seed = 1
lambda1 = 0.1
lambda2 = 1.0
lambda3 = 0.5
rank = 10
missing = 0.2
solver = "cg"
"#,
    );
    let out = binary()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("step"), "stderr was: {stderr}");
}

#[test]
fn binary_runs_end_to_end_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ok.toml",
        r#"
seed = 5
rank = 4
lambda2 = 0.5

[netflix]
users = 30
movies = 40
user_communities = 5
movie_communities = 8
"#,
    );
    let out_dir = dir.path().join("results");
    let out = binary()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final err"), "stdout was: {stdout}");
    assert!(out_dir.join("results.csv").exists());

    let compare = binary()
        .arg("compare")
        .arg(out_dir.join("results.csv"))
        .output()
        .unwrap();
    assert_eq!(compare.status.code(), Some(0));
}
