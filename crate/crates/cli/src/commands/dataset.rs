use std::time::Instant;

use rdes_core::paths::{load_dataset, DatasetFormat, Preprocessor, Split};
use rdes_core::readout::grid_search;
use rdes_core::reservoir::Variant;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::report::{num, RunReport};
use crate::CliError;

/// Full pipeline on user-supplied train and test files.
pub fn cmd_run_dataset(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let d = &cfg.dataset;
    let (Some(train_path), Some(test_path)) = (d.train.as_ref(), d.test.as_ref()) else {
        return Err(CliError::Config("dataset.train: required for custom-dataset".into()));
    };
    let mut report = RunReport::new("run", cfg);
    let t0 = Instant::now();
    let format = |p: &std::path::Path| d.format.unwrap_or_else(|| DatasetFormat::detect(p));
    let raw_train = load_dataset(train_path, format(train_path), Split::Train)?;
    let raw_test = load_dataset(test_path, format(test_path), Split::Test)?;
    if raw_train.dim() != raw_test.dim() {
        return Err(anyhow::anyhow!(
            "{}: {} channels, but the training set has {}",
            test_path.display(),
            raw_test.dim(),
            raw_train.dim()
        )
        .into());
    }
    let present = raw_train.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(anyhow::anyhow!(
            "{}: training set contains a single class; a classifier cannot be fitted",
            train_path.display()
        )
        .into());
    }
    let pre = Preprocessor::fit(&raw_train, &cfg.preprocess)?;
    let train = pre.apply(&raw_train)?;
    let test = pre.apply(&raw_test)?;
    report.timing("data_seconds", num(t0.elapsed().as_secs_f64()));
    report.metric("n_train", train.len());
    report.metric("n_test", test.len());
    report.metric("input_dim", train.dim());
    report.metric("num_classes", train.num_classes);

    let models = d
        .models
        .clone()
        .unwrap_or_else(|| vec![Variant::Rcde, Variant::Rfcde, Variant::Rrde]);
    for model in models {
        let base = cfg.reservoir.spec(model, train.dim(), cfg.seed);
        let t0 = Instant::now();
        let result = grid_search(&train, &test, &base, &cfg.grid)?;
        report.timing(format!("grid_search_seconds.{model}"), num(t0.elapsed().as_secs_f64()));
        report.metric(format!("accuracy.{model}"), num(result.median_accuracy));
        report.metric(format!("cv_accuracy.{model}"), num(result.best_cv_accuracy));
        report.metric(format!("best.{model}"), result.best.to_string());
        report.metric(
            format!("run_accuracies.{model}"),
            Value::from(result.runs.iter().map(|m| num(m.accuracy)).collect::<Vec<_>>()),
        );
    }
    Ok(report)
}
