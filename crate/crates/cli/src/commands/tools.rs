use std::path::Path as FsPath;

use rdes_core::paths::{hurst_dataset, load_dataset, save_dataset, DatasetFormat, Path, Split};
use rdes_core::tensor::{log_signature, LyndonBasis};

use super::read_path_file;
use crate::config::ExperimentConfig;
use crate::report::{num, RunReport};
use crate::CliError;

/// Writes the Hurst task's train and test splits (`train.txt`, `test.txt`)
/// into `out`, in the dataset text format.
pub fn cmd_gen_fbm(cfg: &ExperimentConfig, out: &FsPath) -> Result<RunReport, CliError> {
    let h = &cfg.hurst;
    let (train, test) = hurst_dataset(h.variant, h.n_train_per_class, h.n_test_per_class, h.length, h.dim, cfg.seed)?;
    std::fs::create_dir_all(out)?;
    let mut report = RunReport::new("gen-fbm", cfg);
    for (name, ds) in [("train", &train), ("test", &test)] {
        let file = out.join(format!("{name}.txt"));
        save_dataset(ds, &file)?;
        report.artifacts.push(file);
        report.metric(format!("samples.{name}"), ds.len());
        let checksum: f64 = ds.paths.iter().map(|p| p.values().sum()).sum();
        report.metric(format!("checksum.{name}"), num(checksum));
    }
    Ok(report)
}

/// Lyndon coordinates of the level-`level` log-signature of a path file.
///
/// `input` is either a plain path file or a dataset file, in which case
/// `sample` selects the block.
pub fn cmd_logsig(input: &FsPath, level: usize, sample: usize) -> Result<Vec<(String, f64)>, CliError> {
    if level == 0 {
        return Err(CliError::Config("level: must be at least 1".into()));
    }
    let is_dataset = input.is_dir() || std::fs::read_to_string(input)?.trim_start().starts_with("#dataset");
    let path: Path = if is_dataset {
        let ds = load_dataset(input, DatasetFormat::detect(input), Split::Test)?;
        ds.paths
            .get(sample)
            .cloned()
            .ok_or_else(|| anyhow::anyhow!("{}: no sample {sample} (have {})", input.display(), ds.len()))?
    } else {
        read_path_file(input)?
    };
    let basis = LyndonBasis::shared(path.dim(), level);
    let ls = log_signature(&path, level, &basis)?;
    Ok(basis
        .words()
        .iter()
        .zip(ls.coeffs())
        .map(|(w, &c)| (w.to_string(), c))
        .collect())
}
