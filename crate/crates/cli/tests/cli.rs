use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::Command;

use ndarray::Array2;
use rdes_cli::config::PairKind;
use rdes_cli::{
    cmd_kernel_convergence, cmd_missing_data, cmd_run_dataset, cmd_timing, exit_code, CliError, ExperimentConfig,
    ExperimentKind,
};
use rdes_core::paths::{save_dataset, LabeledDataset, Path, Split};
use rdes_core::reservoir::{Activation, Variant};

fn rdes(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rdes")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &FsPath, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Sinusoids (label 0) against ramps (label 1), 2 channels, 30 samples each.
fn toy(n_per_class: usize, phase_seed: f64, split: Split) -> LabeledDataset {
    let mut paths = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * n_per_class {
        let label = i % 2;
        let phase = (i as f64 * 0.37 + phase_seed).fract();
        let values = Array2::from_shape_fn((30, 2), |(t, c)| {
            let s = t as f64 / 29.0;
            match (label, c) {
                (0, 0) => (6.0 * s + phase).sin(),
                (0, _) => (6.0 * s + phase).cos(),
                (_, 0) => (1.0 + phase) * s,
                _ => -s,
            }
        });
        paths.push(Path::from_values(values).unwrap());
        labels.push(label);
    }
    LabeledDataset::new(paths, labels, 2, split).unwrap()
}

fn small_kernel_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.kernel.widths = vec![8, 16];
    cfg.kernel.num_seeds = 3;
    cfg.kernel.refinement = 4;
    cfg
}

#[test]
fn separable_toy_dataset_is_solved_by_every_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let (train, test) = (tmp.path().join("train.txt"), tmp.path().join("test.txt"));
    save_dataset(&toy(20, 0.1, Split::Train), &train).unwrap();
    save_dataset(&toy(10, 0.6, Split::Test), &test).unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.train = Some(train);
    cfg.dataset.test = Some(test);
    let cfg = cfg.resolve(ExperimentKind::CustomDataset).unwrap();
    let report = cmd_run_dataset(&cfg).unwrap();
    for v in [Variant::Rcde, Variant::Rfcde, Variant::Rrde] {
        assert_eq!(report.metrics[&format!("accuracy.{v}")].as_f64(), Some(1.0), "{v}");
    }
    let again = cmd_run_dataset(&cfg).unwrap();
    assert_eq!(report.metric_section(), again.metric_section());
}

#[test]
fn single_class_training_set_is_a_run_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut ds = toy(4, 0.2, Split::Train);
    ds.labels.iter_mut().for_each(|l| *l = 0);
    let train = tmp.path().join("train.txt");
    save_dataset(&ds, &train).unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        &format!("[dataset]\ntrain = {:?}\ntest = {:?}\n", train, train),
    );
    let (code, _, err) = rdes(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("single class"), "{err}");
}

#[test]
fn malformed_dataset_reports_its_location() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.txt", "#dataset d=1 classes=2\nsample label=0 len=2\n0 1\n1 x\n");
    let cfg = write(
        tmp.path(),
        "run.toml",
        &format!("[dataset]\ntrain = {bad:?}\ntest = {bad:?}\n"),
    );
    let (code, _, err) = rdes(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("bad.txt") && err.contains('4'), "{err}");
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("[reservoir]\nactivation = \"tanh\"\n", "kernel-convergence", "reservoir.activation"),
        ("[kernel]\nwidths = []\n", "kernel-convergence", "kernel.widths"),
        ("[kernel]\nbogus = 1\n", "kernel-convergence", "bogus"),
        ("experiment = \"hurst\"\n", "timing", "experiment"),
        ("[dataset]\ntrain = \"/nonexistent/train.txt\"\ntest = \"/nonexistent/test.txt\"\n", "run", "dataset.train"),
        ("[missing]\nprobabilities = [1.5]\n", "missing-data", "missing.probabilities"),
    ];
    for (i, (text, cmd, field)) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("c{i}.toml"), text);
        let (code, _, err) = rdes(&[cmd, "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 2, "{cmd} {text}: {err}");
        assert!(err.contains(field), "{err}");
    }
    let (code, _, err) = rdes(&["gen-fbm"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn threshold_failure_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "k.toml",
        "[kernel]\nwidths = [4, 8]\nnum_seeds = 2\nrefinement = 2\nstderr_multiple = 0.0\nrelative_tolerance = 0.0\n",
    );
    let out = tmp.path().join("out");
    let (code, stdout, _) = rdes(&[
        "kernel-convergence",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(stdout.contains("passed=false"));
    // Defaulted fields are echoed alongside the ones set in the file.
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("config.kernel.widths=4,8"));
    assert!(report.contains("config.kernel.oracle_features=8192"));
    assert!(report.contains("table.convergence.1.N=8"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["kernel"]["num_seeds"], 2);
    assert_eq!(summary["passed"], false);
}

#[test]
fn constant_pair_estimates_are_one() {
    // The state never leaves z0, so each seed gives |z0|²/N: unbiased for 1.
    for variant in [Variant::Rcde, Variant::Rfcde, Variant::Rrde] {
        let mut cfg = small_kernel_config();
        cfg.kernel.widths = vec![64, 256];
        cfg.kernel.num_seeds = 8;
        cfg.kernel.pair = PairKind::Constant;
        cfg.kernel.variant = variant;
        cfg.kernel.fourier = vec![8];
        cfg.kernel.oracle_features = 16;
        let cfg = cfg.resolve(ExperimentKind::KernelConvergence).unwrap();
        let report = cmd_kernel_convergence(&cfg).unwrap();
        let key = if variant == Variant::Rfcde { "F8.oracle" } else { "oracle" };
        assert!((report.metrics[key].as_f64().unwrap() - 1.0).abs() < 1e-12);
        for row in &report.tables["convergence"].rows {
            let (mean, se) = (row[2].as_f64().unwrap(), row[3].as_f64().unwrap());
            assert!((mean - 1.0).abs() <= 4.0 * se, "{variant}: {mean} (se {se})");
            assert!(se < 0.1, "{variant}: se {se}");
        }
        assert_eq!(report.passed, Some(true));
    }
}

#[test]
fn nonidentity_activation_is_rejected_before_running() {
    let mut cfg = small_kernel_config();
    cfg.reservoir.activation = Activation::Relu;
    let err = cfg.resolve(ExperimentKind::KernelConvergence).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert_eq!(exit_code(&Err(err)), 2);
}

#[test]
fn single_length_timing_has_no_slope() {
    let mut cfg = ExperimentConfig::default();
    cfg.timing.lengths = vec![50];
    cfg.timing.width = 8;
    cfg.timing.num_fourier = 4;
    cfg.timing.models = vec![Variant::Rcde];
    let cfg = cfg.resolve(ExperimentKind::Timing).unwrap();
    let report = cmd_timing(&cfg).unwrap();
    assert_eq!(report.timings["slope.rcde"], "n/a");
    assert!(report.metrics.contains_key("checksum.rcde.l50"));
}

#[test]
fn corruption_seed_is_irrelevant_at_zero_probability() {
    let run = |corruption_seed: u64| {
        let mut cfg = ExperimentConfig::default();
        cfg.hurst.n_train_per_class = 3;
        cfg.hurst.n_test_per_class = 2;
        cfg.hurst.length = 24;
        cfg.hurst.models = vec![Variant::Rcde];
        cfg.reservoir.width = 12;
        cfg.grid.sigma_a = vec![1.0];
        cfg.grid.activation = vec![Activation::Identity];
        cfg.missing.probabilities = vec![0.0];
        cfg.missing.seed = Some(corruption_seed);
        let cfg = cfg.resolve(ExperimentKind::MissingData).unwrap();
        cmd_missing_data(&cfg).unwrap()
    };
    let (a, b) = (run(1), run(2));
    assert_eq!(a.metric_section(), b.metric_section());
    assert_eq!(a.metrics["delta.rcde.p0"].as_f64(), Some(0.0));
}

#[test]
fn logsig_of_a_straight_line_is_its_increment() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "line.txt", "# t x y\n0 0 0\n0.5 1 2\n1 2 4\n");
    let (code, out, err) = rdes(&["logsig", f.to_str().unwrap(), "--level", "2"]);
    assert_eq!(code, 0, "{err}");
    let coords: Vec<(String, f64)> = out
        .lines()
        .map(|l| {
            let (w, v) = l.split_once('=').unwrap();
            (w.to_string(), v.parse().unwrap())
        })
        .collect();
    let words: Vec<&str> = coords.iter().map(|(w, _)| w.as_str()).collect();
    assert_eq!(words, ["1", "2", "12"]);
    assert!((coords[0].1 - 2.0).abs() < 1e-14);
    assert!((coords[1].1 - 4.0).abs() < 1e-14);
    assert!(coords[2].1.abs() < 1e-14);
}

#[test]
fn gen_fbm_writes_loadable_splits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "h.toml",
        "[hurst]\nn_train_per_class = 2\nn_test_per_class = 1\nlength = 16\ndim = 2\n",
    );
    let out = tmp.path().join("data");
    let (code, stdout, err) = rdes(&[
        "gen-fbm",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("metric.samples.train=16"));
    let ds = rdes_core::paths::load_dataset(&out.join("test.txt"), rdes_core::paths::DatasetFormat::File, Split::Test)
        .unwrap();
    assert_eq!(ds.len(), 8);
    assert_eq!(ds.dim(), 2);
}
