use std::time::Instant;

use rdes_core::kernels::{mc_kernel_estimate, rbf_lifted_sig_kernel, sig_kernel_pde, PdeGrid, SchemeOrder};
use rdes_core::reservoir::Variant;
use rdes_core::rff::RffSpec;
use rdes_core::seed::{derive, stream};
use serde_json::Value;

use super::{constant_pair, read_path_file, smooth_pair};
use crate::config::{ExperimentConfig, PairKind};
use crate::report::{num, RunReport, Table};
use crate::CliError;

/// Index of the oracle's Fourier draw in the RFF stream; reservoir draws use
/// per-seed streams, so this never collides with them.
const ORACLE_RFF_INDEX: u64 = u64::MAX;

/// Monte Carlo estimates of the limiting kernel across a width ladder,
/// compared with the PDE (or lifted PDE) oracle.
///
/// Passes when, for every ladder, the error never grows by more than
/// `monotone_stderr` combined standard errors from one width to the next
/// and the last error is within `max(stderr_multiple·se, relative_tolerance·|oracle|)`.
pub fn cmd_kernel_convergence(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let k = &cfg.kernel;
    let (x, y) = match k.pair {
        PairKind::Smooth => smooth_pair(),
        PairKind::Constant => constant_pair(),
        PairKind::Files => {
            let (xf, yf) = (k.x_file.as_ref(), k.y_file.as_ref());
            let (Some(xf), Some(yf)) = (xf, yf) else {
                return Err(CliError::Config("kernel.x_file: required when pair = \"files\"".into()));
            };
            (read_path_file(xf)?, read_path_file(yf)?)
        }
    };
    if x.dim() != y.dim() {
        return Err(CliError::Config(format!(
            "kernel.y_file: {} channels, but x has {}",
            y.dim(),
            x.dim()
        )));
    }
    let d = x.dim();
    let grid = PdeGrid::new(k.refinement, SchemeOrder::Second)?;
    let mut report = RunReport::new("kernel-convergence", cfg);
    let mut table = Table::new(&["F", "N", "mean", "stderr", "oracle", "abs_error"]);

    let ladders: Vec<Option<usize>> = match k.variant {
        Variant::Rfcde => k.fourier.iter().copied().map(Some).collect(),
        _ => vec![None],
    };
    let mut passed = true;
    for f in ladders {
        let label = f.map_or_else(String::new, |f| format!("F{f}."));
        let t0 = Instant::now();
        let oracle = match k.variant {
            Variant::Rfcde => {
                let rff = RffSpec::new(
                    d,
                    k.oracle_features,
                    cfg.reservoir.frequency_scale,
                    derive(cfg.seed, stream::RFF, ORACLE_RFF_INDEX),
                )?;
                rbf_lifted_sig_kernel(&x, &y, &rff, grid)?
            }
            _ => sig_kernel_pde(&x, &y, grid)?,
        };
        report.timing(format!("{label}oracle_seconds"), num(t0.elapsed().as_secs_f64()));

        let mut prev: Option<(f64, f64)> = None;
        let mut monotone = true;
        for &n in &k.widths {
            let mut spec = cfg.reservoir.spec(k.variant, d, cfg.seed);
            spec.width = n;
            if let Some(f) = f {
                spec.num_fourier = f;
            }
            let t0 = Instant::now();
            let est = mc_kernel_estimate(&spec, &x, &y, k.num_seeds)?;
            report.timing(format!("{label}N{n}_seconds"), num(t0.elapsed().as_secs_f64()));
            let err = (est.mean - oracle).abs();
            if let Some((pe, ps)) = prev {
                if err > pe + k.monotone_stderr * (ps * ps + est.stderr * est.stderr).sqrt() {
                    monotone = false;
                }
            }
            prev = Some((err, est.stderr));
            log::info!("{label}N={n}: mean {:.6} se {:.6} oracle {oracle:.6} err {err:.6}", est.mean, est.stderr);
            table.push(vec![
                f.map_or(Value::Null, Value::from),
                Value::from(n),
                num(est.mean),
                num(est.stderr),
                num(oracle),
                num(err),
            ]);
        }
        let (err, se) = prev.expect("widths validated nonempty");
        // Zero spread (e.g. constant paths) leaves only the relative allowance.
        let se = if se.is_finite() { se } else { 0.0 };
        let tolerance = (k.stderr_multiple * se).max(k.relative_tolerance * oracle.abs());
        let within = err <= tolerance;
        report.metric(format!("{label}oracle"), num(oracle));
        report.metric(format!("{label}final_abs_error"), num(err));
        report.metric(format!("{label}final_tolerance"), num(tolerance));
        report.metric(format!("{label}monotone"), monotone);
        report.metric(format!("{label}final_within_tolerance"), within);
        passed &= monotone && within;
    }
    report.tables.insert("convergence".into(), table);
    report.passed = Some(passed);
    Ok(report)
}
