use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::path::unit_grid;
use super::{LabeledDataset, Path};

/// Preprocessing applied before feature extraction.
///
/// Stages run in a fixed order: min–max scaling, resampling, time channel,
/// lead–lag, basepoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationConfig {
    pub time_augment: bool,
    pub basepoint: bool,
    pub lead_lag: bool,
    pub minmax_scale: bool,
    pub resample_length: Option<usize>,
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.resample_length {
            if n < 2 {
                return Err(Error::invalid(format!("resample_length must be >= 2, got {n}")));
            }
        }
        Ok(())
    }

    /// Channel count after augmentation of a `dim`-channel input.
    pub fn output_dim(&self, dim: usize) -> usize {
        let d = dim + usize::from(self.time_augment);
        if self.lead_lag {
            2 * d
        } else {
            d
        }
    }
}

/// Fitted preprocessing pipeline; scaling statistics come from the data
/// passed to [`Preprocessor::fit`] and are reused for every other split.
#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessor {
    cfg: AugmentationConfig,
    ranges: Option<Vec<(f64, f64)>>,
}

impl Preprocessor {
    pub fn fit(train: &LabeledDataset, cfg: &AugmentationConfig) -> Result<Self> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::invalid("cannot preprocess an empty dataset"));
        }
        let ranges = cfg.minmax_scale.then(|| {
            let dim = train.dim();
            let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
            for p in &train.paths {
                for row in p.values().rows() {
                    for (r, &v) in ranges.iter_mut().zip(row.iter()) {
                        r.0 = r.0.min(v);
                        r.1 = r.1.max(v);
                    }
                }
            }
            ranges
        });
        Ok(Preprocessor {
            cfg: cfg.clone(),
            ranges,
        })
    }

    pub fn config(&self) -> &AugmentationConfig {
        &self.cfg
    }

    pub fn apply_path(&self, path: &Path) -> Result<Path> {
        let mut p = path.clone();
        if let Some(ranges) = &self.ranges {
            p = minmax(&p, ranges)?;
        }
        if let Some(n) = self.cfg.resample_length {
            p = resample(&p, n)?;
        }
        if self.cfg.time_augment {
            p = time_augment(&p)?;
        }
        if self.cfg.lead_lag {
            p = lead_lag(&p)?;
        }
        if self.cfg.basepoint {
            p = basepoint(&p)?;
        }
        Ok(p)
    }

    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        if ds.is_empty() {
            return Err(Error::invalid("cannot preprocess an empty dataset"));
        }
        let paths = ds
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| self.apply_path(p).map_err(|e| e.at_sample(i)))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(paths, ds.labels.clone(), ds.num_classes, ds.split)
    }
}

/// Fits the pipeline on `ds` itself and applies it.
pub fn preprocess(ds: &LabeledDataset, cfg: &AugmentationConfig) -> Result<LabeledDataset> {
    Preprocessor::fit(ds, cfg)?.apply(ds)
}

/// Fits on the train split and applies to both splits.
pub fn preprocess_split(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &AugmentationConfig,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let pre = Preprocessor::fit(train, cfg)?;
    Ok((pre.apply(train)?, pre.apply(test)?))
}

/// Maps each channel affinely so `[min, max]` lands on `[-1, 1]`; channels
/// with `min == max` map to 0.
pub fn minmax(path: &Path, ranges: &[(f64, f64)]) -> Result<Path> {
    if ranges.len() != path.dim() {
        return Err(Error::mismatch(format!(
            "{} scaling ranges for {} channels",
            ranges.len(),
            path.dim()
        )));
    }
    let mut values = path.values().to_owned();
    for (mut col, &(lo, hi)) in values.columns_mut().into_iter().zip(ranges) {
        let width = hi - lo;
        if width > 0.0 {
            col.mapv_inplace(|v| 2.0 * (v - lo) / width - 1.0);
        } else {
            col.fill(0.0);
        }
    }
    Path::new(path.times().to_vec(), values)
}

/// Linear resampling onto `n` equispaced times spanning the same interval.
pub fn resample(path: &Path, n: usize) -> Result<Path> {
    if n < 2 {
        return Err(Error::invalid(format!("resample_length must be >= 2, got {n}")));
    }
    let t0 = path.times()[0];
    let t1 = path.times()[path.len() - 1];
    let times: Vec<f64> = unit_grid::<f64>(n)
        .into_iter()
        .map(|u| t0 + u * (t1 - t0))
        .collect();
    let mut values = Array2::zeros((n, path.dim()));
    for (i, &t) in times.iter().enumerate() {
        for (j, v) in path.value_at(t).into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    Path::new(times, values)
}

/// Appends the normalized time `(t - t_0) / (t_end - t_0)` as a last channel.
pub fn time_augment(path: &Path) -> Result<Path> {
    let (l, d) = (path.len(), path.dim());
    let t0 = path.times()[0];
    let span = path.times()[l - 1] - t0;
    let mut values = Array2::zeros((l, d + 1));
    values.slice_mut(ndarray::s![.., ..d]).assign(&path.values());
    for (i, &t) in path.times().iter().enumerate() {
        values[[i, d]] = (t - t0) / span;
    }
    Path::new(path.times().to_vec(), values)
}

/// Lead–lag transform: `2l - 1` samples, lead channels first, lag channels
/// second. The lead moves first at midpoints between original times.
pub fn lead_lag(path: &Path) -> Result<Path> {
    let (l, d) = (path.len(), path.dim());
    let mut values = Array2::zeros((2 * l - 1, 2 * d));
    let mut times = Vec::with_capacity(2 * l - 1);
    for i in 0..l {
        let row = path.row(i);
        values.slice_mut(ndarray::s![2 * i, ..d]).assign(&row);
        values.slice_mut(ndarray::s![2 * i, d..]).assign(&row);
        times.push(path.times()[i]);
        if i + 1 < l {
            values
                .slice_mut(ndarray::s![2 * i + 1, ..d])
                .assign(&path.row(i + 1));
            values.slice_mut(ndarray::s![2 * i + 1, d..]).assign(&row);
            times.push(0.5 * (path.times()[i] + path.times()[i + 1]));
        }
    }
    Path::new(times, values)
}

/// Prepends an all-zero sample one time step before the start.
pub fn basepoint(path: &Path) -> Result<Path> {
    let (l, d) = (path.len(), path.dim());
    let dt = path.times()[1] - path.times()[0];
    let mut times = Vec::with_capacity(l + 1);
    times.push(path.times()[0] - dt);
    times.extend_from_slice(path.times());
    let mut values = Array2::zeros((l + 1, d));
    values.slice_mut(ndarray::s![1.., ..]).assign(&path.values());
    Path::new(times, values)
}
