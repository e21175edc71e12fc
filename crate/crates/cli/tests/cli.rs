//! Integration tests of the experiment commands through the library
//! surface the binary wraps.

use vertcohirf_cli::commands::{cmd_replay, cmd_run, cmd_sweep_agents, cmd_sweep_byzantine};
use vertcohirf_cli::config::ExperimentConfig;
use vertcohirf_cli::hpo::cmd_hpo;

fn config_in(dir: &std::path::Path, toml: &str) -> ExperimentConfig {
    let toml = toml.replace("OUT_DIR", dir.to_str().unwrap());
    ExperimentConfig::from_toml(&toml).unwrap()
}

#[test]
fn run_on_a_tiny_csv_produces_results_with_ari() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiny.csv");
    std::fs::write(
        &csv,
        "x,y,label\n0.0,0.1,0\n0.2,0.0,0\n0.1,0.15,0\n5.0,5.1,1\n5.2,5.0,1\n5.1,5.2,1\n",
    )
    .unwrap();
    let config = config_in(
        dir.path(),
        &format!(
            r#"
[dataset]
kind = "csv"
path = "{}"
label_column = "label"

[[agent]]
strategy = {{ kind = "k_means", k = 2 }}

[run]
master_seed = 3
output_dir = "OUT_DIR/out"
metrics = ["ari"]
"#,
            csv.display()
        ),
    );
    let results = cmd_run(&config).unwrap();
    assert_eq!(results.runs.len(), 1);
    assert_eq!(results.runs[0].ari, Some(1.0));
    assert!(dir.path().join("out/results.json").exists());
    assert!(dir.path().join("out/cfh.json").exists());
    assert!(dir.path().join("out/cfh.nwk").exists());
    assert!(dir.path().join("out/transcript.bin").exists());
}

const MULTIMODAL: &str = r#"
[dataset]
kind = "multimodal"
n = 1200

[[agent]]
features = [0, 1, 2]
strategy = { kind = "dbscan", eps = 2.0, min_samples = 4 }

[[agent]]
features = [3, 4]
strategy = { kind = "k_means", k = 3 }

[run]
master_seed = 42
repetitions = 2
metrics = ["ari"]
output_dir = "OUT_DIR/out"
"#;

#[test]
fn multimodal_run_reports_perfect_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), MULTIMODAL);
    let results = cmd_run(&config).unwrap();
    for run in &results.runs {
        assert_eq!(run.ari, Some(1.0));
        assert_eq!(run.final_clusters, 6);
    }
}

#[test]
fn identical_configs_write_byte_identical_results() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    cmd_run(&config_in(dir_a.path(), MULTIMODAL)).unwrap();
    cmd_run(&config_in(dir_b.path(), MULTIMODAL)).unwrap();
    for file in ["results.json", "cfh.json", "cfh.nwk", "transcript.bin"] {
        let a = std::fs::read(dir_a.path().join("out").join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join("out").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn concurrent_mode_writes_the_same_artifacts_as_sequential() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    cmd_run(&config_in(dir_a.path(), MULTIMODAL)).unwrap();
    let concurrent = MULTIMODAL.replace("master_seed = 42", "master_seed = 42\nmode = \"concurrent\"");
    cmd_run(&config_in(dir_b.path(), &concurrent)).unwrap();
    let a = std::fs::read(dir_a.path().join("out/results.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("out/results.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn written_transcripts_replay_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), MULTIMODAL);
    cmd_run(&config).unwrap();
    let summary = cmd_replay(&dir.path().join("out/transcript.bin")).unwrap();
    assert_eq!(summary.agents, 2);
    assert!(!summary.rounds.is_empty());
    assert!(summary.rounds.iter().all(|r| r.within_bound));
    assert!(summary.rounds.iter().all(|r| r.messages == 4));
}

#[test]
fn truncated_transcripts_fail_to_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), MULTIMODAL);
    cmd_run(&config).unwrap();
    let path = dir.path().join("out/transcript.bin");
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(cmd_replay(&path).is_err());
}

#[test]
fn dataset_dump_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let toml = MULTIMODAL.replace("repetitions = 2", "repetitions = 1\ndump_dataset = true");
    cmd_run(&config_in(dir.path(), &toml)).unwrap();
    let meta =
        vertcohirf::datagen::read_meta(&dir.path().join("out/dataset.meta.json")).unwrap();
    assert_eq!(meta.n, 600);
    assert_eq!(meta.p, 5);
    assert_eq!(meta.c, Some(6));
    assert_eq!(meta.generator, "multimodal");
    let ds = vertcohirf::datagen::load_csv(
        &dir.path().join("out/dataset.csv"),
        Some("label"),
        &[],
    )
    .unwrap();
    assert_eq!(ds.n(), 600);
}

const BLOBS_SWEEP: &str = r#"
[dataset]
kind = "blobs"
n = 200
clusters = 4
sigma = 0.25
center_distance = 2.0

[[agent]]
strategy = { kind = "k_means", k = 4 }

[[agent]]
strategy = { kind = "k_means", k = 4 }

[[agent]]
strategy = { kind = "k_means", k = 4 }

[run]
master_seed = 5
metrics = ["ari"]
output_dir = "OUT_DIR/out"
"#;

#[test]
fn byzantine_sweep_emits_all_modes_per_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), BLOBS_SWEEP);
    let out = dir.path().join("curve.csv");
    let rows = cmd_sweep_byzantine(&config, &[0.1, 0.9], 3, Some(&out)).unwrap();
    assert_eq!(rows.len(), 8, "2 sigmas x (honest + 3 attacks)");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("sigma,mode,mean_ari,sd,trials"));
    let low_honest = rows
        .iter()
        .find(|r| r.sigma == 0.1 && r.mode == "honest")
        .unwrap();
    assert!(low_honest.mean_ari > 0.95);
    for row in &rows {
        assert_eq!(row.trials, 3);
    }
}

#[test]
fn byzantine_sweep_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), BLOBS_SWEEP);
    assert!(cmd_sweep_byzantine(&config, &[1.5], 3, None).is_err());
    assert!(cmd_sweep_byzantine(&config, &[0.5], 0, None).is_err());
    let multimodal = config_in(dir.path(), MULTIMODAL);
    assert!(cmd_sweep_byzantine(&multimodal, &[0.5], 1, None).is_err());
}

#[test]
fn agent_sweep_sd_matches_recomputation_from_split_scores() {
    let dir = tempfile::tempdir().unwrap();
    let toml = BLOBS_SWEEP.replace("center_distance = 2.0", "center_distance = 3.0\nnoise_features = 8");
    let config = config_in(dir.path(), &toml);
    let rows = cmd_sweep_agents(&config, &[2, 3], 4, None).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row.split_aris.len(), 4);
        let mean = row.split_aris.iter().sum::<f64>() / 4.0;
        let var = row
            .split_aris
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / 3.0;
        assert!((row.mean_ari - mean).abs() < 1e-12);
        assert!((row.sd - var.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn hpo_single_trial_returns_that_trial() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!("{MULTIMODAL}\n[hpo]\ntrials = 1\nmetric = \"ari\"\n")
        .replace("repetitions = 2", "repetitions = 1");
    let config = config_in(dir.path(), &toml);
    let outcome = cmd_hpo(&config, None).unwrap();
    assert_eq!(outcome.trials.len(), 1);
    assert_eq!(outcome.best_trial, 0);
    assert_eq!(outcome.trials[0].score, Some(outcome.best_score));
    assert!(outcome.best_config.is_some());
}

#[test]
fn hpo_with_constant_objective_accepts_the_first_trial() {
    // Two distinct repeated rows: any sampled k groups them identically,
    // so every trial scores exactly 1.0 and the first trial wins.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two_rows.csv");
    let mut text = String::from("x,y,label\n");
    for i in 0..20 {
        if i % 2 == 0 {
            text.push_str("0.0,0.0,0\n");
        } else {
            text.push_str("9.0,9.0,1\n");
        }
    }
    std::fs::write(&csv, text).unwrap();
    let config = config_in(
        dir.path(),
        &format!(
            r#"
[dataset]
kind = "csv"
path = "{}"
label_column = "label"

[[agent]]
strategy = {{ kind = "k_means", k = 2 }}
tune = true

[run]
master_seed = 9
metrics = ["ari"]
output_dir = "OUT_DIR/out"

[hpo]
trials = 12
"#,
            csv.display()
        ),
    );
    let outcome = cmd_hpo(&config, None).unwrap();
    assert_eq!(outcome.best_trial, 0);
    assert_eq!(outcome.best_score, 1.0);
    assert!(outcome.trials.iter().all(|t| t.score == Some(1.0)));
}

#[test]
fn hpo_rejects_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), MULTIMODAL);
    assert!(cmd_hpo(&config, Some(0)).is_err());
}

#[test]
fn tcp_transport_config_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let toml = MULTIMODAL
        .replace("repetitions = 2", "repetitions = 1")
        .replace(
            "[run]",
            "[transport]\nmode = \"tcp\"\ntimeout_secs = 10\n\n[run]",
        );
    let config = config_in(dir.path(), &toml);
    let results = cmd_run(&config).unwrap();
    assert_eq!(results.runs[0].ari, Some(1.0));
}

#[test]
fn output_dir_env_override_wins() {
    // Not parallel-safe with other env-reading tests, so the variable is
    // set only within this test's scope.
    let dir = tempfile::tempdir().unwrap();
    let override_dir = dir.path().join("elsewhere");
    std::env::set_var("VERTCOHIRF_OUT", &override_dir);
    let toml = MULTIMODAL.replace("repetitions = 2", "repetitions = 1");
    let config = config_in(dir.path(), &toml);
    let outcome = cmd_run(&config);
    std::env::remove_var("VERTCOHIRF_OUT");
    outcome.unwrap();
    assert!(override_dir.join("results.json").exists());
    assert!(!dir.path().join("out/results.json").exists());
}
