use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::fbm::generate_fbm;
use super::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Labelled collection of paths sharing a channel count.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub paths: Vec<Path>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(paths: Vec<Path>, labels: Vec<usize>, num_classes: usize, split: Split) -> Result<Self> {
        if paths.len() != labels.len() {
            return Err(Error::mismatch(format!(
                "{} paths but {} labels",
                paths.len(),
                labels.len()
            )));
        }
        if num_classes < 2 {
            return Err(Error::invalid(format!("need at least 2 classes, got {num_classes}")));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::invalid(format!("label {l} outside 0..{num_classes}")));
        }
        if let Some(first) = paths.first() {
            let d = first.dim();
            if let Some(i) = paths.iter().position(|p| p.dim() != d) {
                return Err(Error::mismatch(format!(
                    "sample {i} has {} channels, expected {d}",
                    paths[i].dim()
                )));
            }
        }
        Ok(LabeledDataset {
            paths,
            labels,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.paths.first().map_or(0, Path::dim)
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            paths: indices.iter().map(|&i| self.paths[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            split: self.split,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HurstVariant {
    V1,
    V2,
}

/// Hurst exponents of the eight classes, ascending; label `i` is `HURST_GRID[i]`.
pub const HURST_GRID: [f64; 8] = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75];

/// Fractional Brownian motion classification task.
///
/// Sample `k` of the combined train-then-test enumeration uses seed
/// `derive(seed, FBM, k)`; V2 standardizes each channel of each sample to
/// zero mean and unit (population) variance.
pub fn hurst_dataset(
    variant: HurstVariant,
    n_train_per_class: usize,
    n_test_per_class: usize,
    len: usize,
    dim: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if n_train_per_class == 0 || n_test_per_class == 0 || dim == 0 {
        return Err(Error::invalid("Hurst dataset sizes must be positive"));
    }
    let mut counter = 0u64;
    let mut make = |per_class: usize, split: Split| -> Result<LabeledDataset> {
        let mut paths = Vec::with_capacity(per_class * HURST_GRID.len());
        let mut labels = Vec::with_capacity(per_class * HURST_GRID.len());
        for (label, &h) in HURST_GRID.iter().enumerate() {
            for _ in 0..per_class {
                let s = seed::derive(seed, seed::stream::FBM, counter);
                counter += 1;
                let mut p = generate_fbm(h, len, dim, s)?;
                if variant == HurstVariant::V2 {
                    p = standardize(&p)?;
                }
                paths.push(p);
                labels.push(label);
            }
        }
        LabeledDataset::new(paths, labels, HURST_GRID.len(), split)
    };
    let train = make(n_train_per_class, Split::Train)?;
    let test = make(n_test_per_class, Split::Test)?;
    Ok((train, test))
}

/// Per-channel standardization to zero mean, unit population variance.
pub fn standardize(path: &Path) -> Result<Path> {
    let n = path.len() as f64;
    let mut values = path.values().to_owned();
    for mut col in values.columns_mut() {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let var = col.iter().map(|v| v * v).sum::<f64>() / n;
        if var > 0.0 {
            let sd = var.sqrt();
            col.mapv_inplace(|v| v / sd);
        } else {
            col.fill(0.0);
        }
        // second pass removes the rounding residue of the first mean
        let residue = col.sum() / n;
        col.mapv_inplace(|v| v - residue);
    }
    Path::new(path.times().to_vec(), values)
}

/// On-disk layout of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// One text file holding every sample block.
    File,
    /// A directory with one file per sample, read in file-name order.
    Directory,
}

impl DatasetFormat {
    pub fn detect(path: &FsPath) -> Self {
        if path.is_dir() {
            DatasetFormat::Directory
        } else {
            DatasetFormat::File
        }
    }
}

pub fn load_dataset(path: &FsPath, format: DatasetFormat, split: Split) -> Result<LabeledDataset> {
    match format {
        DatasetFormat::File => {
            let text = fs::read_to_string(path)?;
            let parsed = parse_dataset(&text, path, None)?;
            if parsed.paths.is_empty() {
                return Err(Error::NoSamples(path.to_path_buf()));
            }
            LabeledDataset::new(parsed.paths, parsed.labels, parsed.classes, split)
        }
        DatasetFormat::Directory => {
            let mut files: Vec<PathBuf> = fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|p| p.is_file());
            files.sort();
            let mut header: Option<(usize, usize)> = None;
            let (mut paths, mut labels) = (Vec::new(), Vec::new());
            for f in &files {
                let text = fs::read_to_string(f)?;
                let parsed = parse_dataset(&text, f, header)?;
                header = Some((parsed.dim, parsed.classes));
                paths.extend(parsed.paths);
                labels.extend(parsed.labels);
            }
            let Some((_, classes)) = header else {
                return Err(Error::NoSamples(path.to_path_buf()));
            };
            if paths.is_empty() {
                return Err(Error::NoSamples(path.to_path_buf()));
            }
            LabeledDataset::new(paths, labels, classes, split)
        }
    }
}

pub fn save_dataset(ds: &LabeledDataset, path: &FsPath) -> Result<()> {
    fs::write(path, format_dataset(ds))?;
    Ok(())
}

/// Writes one file per sample (`sample_00000.txt`, ...) into `dir`.
pub fn save_dataset_dir(ds: &LabeledDataset, dir: &FsPath) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, (p, &l)) in ds.paths.iter().zip(&ds.labels).enumerate() {
        let mut out = format!("#dataset d={} classes={}\n", ds.dim(), ds.num_classes);
        write_block(&mut out, p, l);
        fs::write(dir.join(format!("sample_{i:05}.txt")), out)?;
    }
    Ok(())
}

pub fn format_dataset(ds: &LabeledDataset) -> String {
    let mut out = format!("#dataset d={} classes={}\n", ds.dim(), ds.num_classes);
    for (i, (p, &l)) in ds.paths.iter().zip(&ds.labels).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_block(&mut out, p, l);
    }
    out
}

fn write_block(out: &mut String, p: &Path, label: usize) {
    let _ = writeln!(out, "sample label={} len={}", label, p.len());
    for (t, row) in p.times().iter().zip(p.values().rows()) {
        let _ = write!(out, "{t:?}");
        for v in row {
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
    }
}

struct Parsed {
    dim: usize,
    classes: usize,
    paths: Vec<Path>,
    labels: Vec<usize>,
}

fn key_value(token: &str, key: &str) -> Option<usize> {
    token.strip_prefix(key)?.strip_prefix('=')?.parse().ok()
}

fn parse_dataset(text: &str, file: &FsPath, expected: Option<(usize, usize)>) -> Result<Parsed> {
    let err = |line: usize, message: String| Error::Parse {
        path: file.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    fn next_nonblank<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Option<(usize, &'a str)> {
        lines.find(|(_, l)| !l.is_empty())
    }

    let mut pending = next_nonblank(&mut lines);
    let (dim, classes) = match pending {
        Some((n, l)) if l.starts_with("#dataset") => {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let d = toks.iter().find_map(|t| key_value(t, "d"));
            let c = toks.iter().find_map(|t| key_value(t, "classes"));
            match (toks.first(), d, c) {
                (Some(&"#dataset"), Some(d), Some(c)) if d > 0 && c >= 2 => {
                    if let Some(exp) = expected {
                        if exp != (d, c) {
                            return Err(err(n, format!("header (d={d}, classes={c}) differs from earlier files {exp:?}")));
                        }
                    }
                    pending = next_nonblank(&mut lines);
                    (d, c)
                }
                _ => return Err(err(n, format!("malformed header `{l}`"))),
            }
        }
        Some((n, _)) => match expected {
            Some(exp) => exp,
            None => return Err(err(n, "missing `#dataset d=<int> classes=<int>` header".into())),
        },
        None => match expected {
            Some(exp) => exp,
            None => return Err(Error::NoSamples(file.to_path_buf())),
        },
    };

    let mut paths = Vec::new();
    let mut labels = Vec::new();
    while let Some((n, l)) = pending {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let label = toks.iter().find_map(|t| key_value(t, "label"));
        let len = toks.iter().find_map(|t| key_value(t, "len"));
        let (label, len) = match (toks.first(), label, len) {
            (Some(&"sample"), Some(label), Some(len)) => (label, len),
            _ => return Err(err(n, format!("expected `sample label=<int> len=<int>`, found `{l}`"))),
        };
        if label >= classes {
            return Err(err(n, format!("unknown label {label} (classes={classes})")));
        }
        let mut times = Vec::with_capacity(len);
        let mut values = Array2::zeros((len, dim));
        for row in 0..len {
            let (rn, rl) = lines
                .next()
                .ok_or_else(|| err(n, format!("sample declares len={len} but the file ends after {row} rows")))?;
            let nums: Vec<f64> = rl
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(rn, format!("invalid number `{t}`"))))
                .collect::<Result<_>>()?;
            if nums.len() != dim + 1 {
                return Err(err(rn, format!("expected {} columns (t + {dim} values), found {}", dim + 1, nums.len())));
            }
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(err(rn, "non-finite value".into()));
            }
            if let Some(&prev) = times.last() {
                if nums[0] <= prev {
                    return Err(err(rn, format!("time {} does not increase (previous {prev})", nums[0])));
                }
            }
            times.push(nums[0]);
            for (j, &v) in nums[1..].iter().enumerate() {
                values[[row, j]] = v;
            }
        }
        let path = Path::new(times, values).map_err(|e| err(n, e.to_string()))?;
        paths.push(path);
        labels.push(label);
        pending = next_nonblank(&mut lines);
    }
    Ok(Parsed {
        dim,
        classes,
        paths,
        labels,
    })
}
