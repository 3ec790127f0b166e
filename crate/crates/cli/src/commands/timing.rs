use std::time::Instant;

use rdes_core::paths::generate_fbm;
use rdes_core::reservoir::{extract_batch, ReservoirState};
use rdes_core::seed::{derive, stream};
use serde_json::Value;

use super::log_log_slope;
use crate::config::ExperimentConfig;
use crate::report::{num, RunReport, Table};
use crate::CliError;

/// Extraction time per path across a length ladder, single-threaded.
///
/// Each point is the best of `repetitions` timed calls after `warmup`
/// untimed ones; reservoir generation is not timed. Measured values go to
/// the report's timing section, and a feature checksum per point goes to
/// the metrics so reruns can be compared.
pub fn cmd_timing(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let t = &cfg.timing;
    let mut report = RunReport::new("timing", cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(anyhow::Error::from)?;
    let mut table = Table::new(&["model", "length", "seconds_per_path"]);
    for &model in &t.models {
        let mut spec = cfg.reservoir.spec(model, t.dim, cfg.seed);
        spec.width = t.width;
        spec.num_fourier = t.num_fourier;
        spec.chunk_size = t.chunk_size;
        let state = ReservoirState::<f64>::new(&spec)?;
        let mut seconds = Vec::with_capacity(t.lengths.len());
        for &len in &t.lengths {
            let paths = (0..t.batch)
                .map(|i| generate_fbm(0.5, len, t.dim, derive(cfg.seed, stream::FBM, i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let (best, checksum) = pool.install(|| -> Result<(f64, f64), CliError> {
                for _ in 0..t.warmup {
                    extract_batch(&state, &paths)?;
                }
                let mut best = f64::INFINITY;
                let mut checksum = 0.0;
                for _ in 0..t.repetitions {
                    let t0 = Instant::now();
                    let feats = extract_batch(&state, &paths)?;
                    best = best.min(t0.elapsed().as_secs_f64());
                    checksum = feats.values().sum();
                }
                Ok((best, checksum))
            })?;
            let per_path = best / t.batch as f64;
            seconds.push(per_path);
            report.metric(format!("checksum.{model}.l{len}"), num(checksum));
            report.timing(format!("seconds.{model}.l{len}"), num(per_path));
            table.push(vec![Value::from(model.to_string()), Value::from(len), num(per_path)]);
        }
        let lengths: Vec<f64> = t.lengths.iter().map(|&l| l as f64).collect();
        match log_log_slope(&lengths, &seconds) {
            Some(s) => {
                report.timing(format!("slope.{model}"), num(s));
                if t.checked.contains(&model) {
                    let ok = (t.slope_range.0..=t.slope_range.1).contains(&s);
                    report.timing(format!("slope_in_range.{model}"), ok);
                }
            }
            None => report.timing(format!("slope.{model}"), "n/a"),
        }
    }
    // Timings vary between runs, so the table sits with them, not in `tables`.
    report.timing("table", serde_json::to_value(&table).map_err(anyhow::Error::from)?);
    Ok(report)
}
