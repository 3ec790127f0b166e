mod dataset;
mod hurst;
mod kernel;
mod timing;
mod tools;

use std::fs;
use std::path::Path as FsPath;

use ndarray::Array2;
use rdes_core::paths::Path;

use crate::CliError;

pub use dataset::cmd_run_dataset;
pub use hurst::{cmd_hurst, cmd_missing_data};
pub use kernel::cmd_kernel_convergence;
pub use timing::cmd_timing;
pub use tools::{cmd_gen_fbm, cmd_logsig};

/// The fixed 2D pair of the convergence study, 50 samples on `[0, 1]`:
/// `x = (0.8t, 0.3 sin 2πt)`, `y = (0.6 sin(πt/2), 1.6 t(1 - t))`.
pub fn smooth_pair() -> (Path, Path) {
    let n = 50;
    let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let pi = std::f64::consts::PI;
    let x = Array2::from_shape_fn((n, 2), |(i, c)| match c {
        0 => 0.8 * t[i],
        _ => 0.3 * (2.0 * pi * t[i]).sin(),
    });
    let y = Array2::from_shape_fn((n, 2), |(i, c)| match c {
        0 => 0.6 * (pi * t[i] / 2.0).sin(),
        _ => 1.6 * t[i] * (1.0 - t[i]),
    });
    (
        Path::new(t.clone(), x).expect("valid grid"),
        Path::new(t, y).expect("valid grid"),
    )
}

pub(crate) fn constant_pair() -> (Path, Path) {
    let t: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let x = Array2::from_shape_fn((50, 2), |(_, c)| [0.3, -0.7][c]);
    let y = Array2::from_shape_fn((50, 2), |(_, c)| [1.1, 0.2][c]);
    (
        Path::new(t.clone(), x).expect("valid grid"),
        Path::new(t, y).expect("valid grid"),
    )
}

/// Reads a single path: one row `t v_1 ... v_d` per line, `#` comments and
/// blank lines ignored.
pub fn read_path_file(file: &FsPath) -> Result<Path, CliError> {
    let text = fs::read_to_string(file)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut dim = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| anyhow::anyhow!("{}:{}: {e}", file.display(), n + 1))?;
        if nums.len() < 2 {
            return Err(anyhow::anyhow!("{}:{}: need a time and at least one value", file.display(), n + 1).into());
        }
        match dim {
            None => dim = Some(nums.len() - 1),
            Some(d) if d != nums.len() - 1 => {
                return Err(anyhow::anyhow!(
                    "{}:{}: expected {} values, found {}",
                    file.display(),
                    n + 1,
                    d,
                    nums.len() - 1
                )
                .into())
            }
            _ => {}
        }
        times.push(nums[0]);
        values.extend_from_slice(&nums[1..]);
    }
    let dim = dim.ok_or_else(|| anyhow::anyhow!("{}: no samples", file.display()))?;
    let values = Array2::from_shape_vec((times.len(), dim), values).map_err(anyhow::Error::from)?;
    Path::new(times, values).map_err(|e| anyhow::anyhow!("{}: {e}", file.display()).into())
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
