use std::time::Instant;

use rdes_core::paths::{
    corrupt_and_impute, hurst_dataset, CorruptionConfig, HurstVariant, LabeledDataset, Preprocessor,
};
use rdes_core::readout::{fit_pipeline, grid_search, median, run_seed, GridSearchResult};
use rdes_core::reservoir::{ReservoirSpec, Variant};
use rdes_core::seed::{derive, stream};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::report::{num, RunReport, Table};
use crate::CliError;

/// Published V1 accuracy at `N = 64` for the full-size task, echoed for
/// comparison only.
const FULL_SCALE_RRDE_V1: f64 = 0.955;

struct HurstData {
    raw_test: LabeledDataset,
    pre: Preprocessor,
    train: LabeledDataset,
    test: LabeledDataset,
}

fn hurst_data(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<HurstData, CliError> {
    let h = &cfg.hurst;
    let t0 = Instant::now();
    let (raw_train, raw_test) = hurst_dataset(h.variant, h.n_train_per_class, h.n_test_per_class, h.length, h.dim, cfg.seed)?;
    if h.variant == HurstVariant::V2 {
        check_standardized(&raw_train)?;
        check_standardized(&raw_test)?;
        report.metric("v2_standardized", true);
    }
    let pre = Preprocessor::fit(&raw_train, &cfg.preprocess)?;
    let train = pre.apply(&raw_train)?;
    let test = pre.apply(&raw_test)?;
    report.timing("data_seconds", num(t0.elapsed().as_secs_f64()));
    report.metric("n_train", train.len());
    report.metric("n_test", test.len());
    report.metric("input_dim", train.dim());
    report.metric("chance", num(1.0 / train.num_classes as f64));
    Ok(HurstData {
        raw_test,
        pre,
        train,
        test,
    })
}

fn check_standardized(ds: &LabeledDataset) -> Result<(), CliError> {
    for (i, p) in ds.paths.iter().enumerate() {
        let n = p.len() as f64;
        for (c, col) in p.values().columns().into_iter().enumerate() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if mean.abs() > 1e-10 || (var - 1.0).abs() > 1e-10 {
                return Err(anyhow::anyhow!(
                    "sample {i} channel {c} not standardized: mean {mean:e}, variance {var}"
                )
                .into());
            }
        }
    }
    Ok(())
}

fn search(
    cfg: &ExperimentConfig,
    data: &HurstData,
    model: Variant,
    report: &mut RunReport,
) -> Result<GridSearchResult, CliError> {
    let base = cfg.reservoir.spec(model, data.train.dim(), cfg.seed);
    let t0 = Instant::now();
    let result = grid_search(&data.train, &data.test, &base, &cfg.grid)?;
    report.timing(format!("grid_search_seconds.{model}"), num(t0.elapsed().as_secs_f64()));
    let failed = result.scores.iter().filter(|s| s.error.is_some()).count();
    report.metric(format!("accuracy.{model}"), num(result.median_accuracy));
    report.metric(format!("cv_accuracy.{model}"), num(result.best_cv_accuracy));
    report.metric(format!("best.{model}"), result.best.to_string());
    report.metric(
        format!("run_accuracies.{model}"),
        Value::from(result.runs.iter().map(|m| num(m.accuracy)).collect::<Vec<_>>()),
    );
    report.metric(format!("grid_points.{model}"), result.scores.len());
    report.metric(format!("grid_failures.{model}"), failed);
    Ok(result)
}

/// Hurst-exponent classification: generate, preprocess, grid-search each
/// model and report the median test accuracy over the refit runs.
pub fn cmd_hurst(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("hurst", cfg);
    let data = hurst_data(cfg, &mut report)?;
    for &model in &cfg.hurst.models {
        search(cfg, &data, model, &mut report)?;
    }
    if cfg.hurst.variant == HurstVariant::V1 {
        report.metric("reference.full_scale.rrde", num(FULL_SCALE_RRDE_V1));
    }
    Ok(report)
}

/// Trains on clean data, then scores corrupted copies of the test split.
///
/// Corruption is applied to the raw test paths before preprocessing, and
/// sample `i` uses corruption seed `derive(seed, CORRUPT, i)`. Deltas are
/// median accuracy at `p` minus the clean median.
pub fn cmd_missing_data(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("missing-data", cfg);
    let data = hurst_data(cfg, &mut report)?;
    let m = &cfg.missing;
    let corruption_seed = m.seed.unwrap_or_else(|| derive(cfg.seed, stream::CORRUPT, 0));
    let n_test = data.test.len() as f64;
    let mut table = Table::new(&["model", "p", "accuracy", "delta"]);

    let corrupted: Vec<LabeledDataset> = m
        .probabilities
        .iter()
        .map(|&p| {
            let paths = data
                .raw_test
                .paths
                .iter()
                .enumerate()
                .map(|(i, path)| {
                    let cc = CorruptionConfig {
                        missing_prob: p,
                        seed: derive(corruption_seed, stream::CORRUPT, i as u64),
                        on_channel_loss: m.on_channel_loss,
                    };
                    corrupt_and_impute(path, &cc).map_err(|e| anyhow::anyhow!("p={p}, test sample {i}: {e}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let raw = LabeledDataset::new(paths, data.raw_test.labels.clone(), data.raw_test.num_classes, data.raw_test.split)?;
            Ok(data.pre.apply(&raw)?)
        })
        .collect::<Result<_, CliError>>()?;

    for &model in &cfg.hurst.models {
        let result = search(cfg, &data, model, &mut report)?;
        let best = &result.best;
        let t0 = Instant::now();
        let mut clean = Vec::new();
        let mut per_p = vec![Vec::new(); corrupted.len()];
        for r in 0..cfg.grid.runs {
            let spec = ReservoirSpec {
                seed: run_seed(cfg.grid.seed, r),
                ..best.spec.clone()
            };
            let pipe = fit_pipeline(&data.train, &spec, best.lambda, best.normalize)?;
            clean.push(pipe.evaluate(&data.test)?.accuracy);
            for (acc, ds) in per_p.iter_mut().zip(&corrupted) {
                acc.push(pipe.evaluate(ds)?.accuracy);
            }
        }
        report.timing(format!("corrupted_eval_seconds.{model}"), num(t0.elapsed().as_secs_f64()));
        let clean_median = median(&clean);
        let mut prev: Option<(f64, f64)> = None;
        for (&p, accs) in m.probabilities.iter().zip(&per_p) {
            let acc = median(accs);
            let delta = acc - clean_median;
            report.metric(format!("accuracy.{model}.p{p}"), num(acc));
            report.metric(format!("delta.{model}.p{p}"), num(delta));
            table.push(vec![Value::from(model.to_string()), num(p), num(acc), num(delta)]);
            // Binomial noise of a test-set accuracy, floored at one sample.
            let noise = (2.0 * (clean_median * (1.0 - clean_median) / n_test).sqrt()).max(1.0 / n_test);
            if let Some((pp, pa)) = prev {
                if p > pp && acc > pa + noise {
                    report.notes.push(format!(
                        "{model}: accuracy rose from {pa:.4} at p={pp} to {acc:.4} at p={p}, beyond noise {noise:.4}"
                    ));
                }
            }
            prev = Some((p, acc));
        }
    }
    report.tables.insert("missing_data".into(), table);
    Ok(report)
}
