use std::fmt::Write as _;
use std::path::Path as FsPath;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::scalar::Scalar;

use super::spec::Variant;
use super::state::ReservoirState;

/// Samples advanced together per lockstep group.
const GROUP: usize = 64;

/// Terminal reservoir states of a dataset, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    variant: Variant,
    spec_hash: String,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, variant: Variant, spec_hash: impl Into<String>) -> Result<Self> {
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row, col });
        }
        Ok(FeatureMatrix {
            values,
            variant,
            spec_hash: spec_hash.into(),
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(ndarray::Axis(0), rows),
            variant: self.variant,
            spec_hash: self.spec_hash.clone(),
        }
    }

    /// Text form: a `#features` header line, then one row per line with
    /// 17 significant digits.
    pub fn format(&self) -> String {
        let mut out = format!(
            "#features n={} N={} variant={} spec={}\n",
            self.rows(),
            self.cols(),
            self.variant,
            self.spec_hash
        );
        for row in self.values.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn parse(text: &str, source: &FsPath) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| err(1, "missing #features header".into()))?;
        let header = header
            .trim()
            .strip_prefix("#features")
            .ok_or_else(|| err(hline + 1, "expected `#features` header".into()))?;
        let (mut n, mut cols, mut variant, mut hash) = (None, None, None, None);
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| err(hline + 1, format!("malformed header field `{field}`")))?;
            match k {
                "n" => n = v.parse::<usize>().ok(),
                "N" => cols = v.parse::<usize>().ok(),
                "variant" => variant = v.parse::<Variant>().ok(),
                "spec" => hash = Some(v.to_string()),
                _ => return Err(err(hline + 1, format!("unknown header field `{k}`"))),
            }
        }
        let (n, cols, variant) = match (n, cols, variant) {
            (Some(n), Some(c), Some(v)) => (n, c, v),
            _ => return Err(err(hline + 1, "header needs n=, N= and variant=".into())),
        };
        let mut values = Array2::zeros((n, cols));
        let mut count = 0;
        for (idx, line) in lines {
            if count == n {
                return Err(err(idx + 1, format!("more than {n} rows")));
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != cols {
                return Err(err(idx + 1, format!("expected {cols} values, found {}", cells.len())));
            }
            for (j, c) in cells.iter().enumerate() {
                values[[count, j]] = c
                    .parse::<f64>()
                    .map_err(|e| err(idx + 1, format!("bad number `{c}`: {e}")))?;
            }
            count += 1;
        }
        if count != n {
            return Err(err(text.lines().count(), format!("expected {n} rows, found {count}")));
        }
        FeatureMatrix::new(values, variant, hash.unwrap_or_default())
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }
}

/// Extracts terminal features for every path. Samples are processed in
/// lockstep groups, groups run in parallel; row `i` belongs to `paths[i]`.
pub fn extract_batch<T: Scalar>(state: &ReservoirState<T>, paths: &[Path<T>]) -> Result<FeatureMatrix> {
    let n = state.width();
    let groups: Vec<Result<Array2<T>>> = paths
        .par_chunks(GROUP)
        .enumerate()
        .map(|(g, chunk)| match state.extract_many(chunk) {
            Ok(z) => Ok(z),
            Err(_) => {
                // rerun one by one so every failing sample is reported
                let mut failures = Vec::new();
                for (i, p) in chunk.iter().enumerate() {
                    if let Err(e) = state.extract(p) {
                        failures.push(e.at_sample(g * GROUP + i));
                    }
                }
                Err(Error::Batch {
                    total: chunk.len(),
                    failures,
                })
            }
        })
        .collect();
    let mut values = Array2::zeros((paths.len(), n));
    let mut failures = Vec::new();
    for (g, group) in groups.into_iter().enumerate() {
        match group {
            Ok(z) => {
                for (i, row) in z.rows().into_iter().enumerate() {
                    values
                        .row_mut(g * GROUP + i)
                        .assign(&row.mapv(|v| v.as_f64()));
                }
            }
            Err(Error::Batch { failures: f, .. }) => failures.extend(f),
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Batch {
            total: paths.len(),
            failures,
        });
    }
    FeatureMatrix::new(values, state.spec().variant, state.spec().hash())
}
