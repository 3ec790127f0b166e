use std::fmt::Write as _;
use std::path::Path as FsPath;

use nalgebra::DMatrix;
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::paths::Path;

/// Kernel evaluations between two sets of paths.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    values: Array2<f64>,
    kind: String,
    /// PDE refinement used, if any.
    pub refinement: Option<usize>,
}

impl GramMatrix {
    pub fn new(values: Array2<f64>, kind: impl Into<String>) -> Self {
        GramMatrix {
            values,
            kind: kind.into(),
            refinement: None,
        }
    }

    /// Evaluates `kernel` on all pairs; when `ys` is `None` the Gram is of
    /// `xs` against itself and only the upper triangle is computed.
    pub fn compute<F>(kind: &str, xs: &[Path], ys: Option<&[Path]>, kernel: F) -> Result<Self>
    where
        F: Fn(&Path, &Path) -> Result<f64> + Sync,
    {
        let symmetric = ys.is_none();
        let ys = ys.unwrap_or(xs);
        let (n, m) = (xs.len(), ys.len());
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (if symmetric { i } else { 0 }..m).map(move |j| (i, j)))
            .collect();
        let vals = pairs
            .par_iter()
            .map(|&(i, j)| kernel(&xs[i], &ys[j]))
            .collect::<Result<Vec<f64>>>()?;
        let mut values = Array2::zeros((n, m));
        for (&(i, j), v) in pairs.iter().zip(vals) {
            values[[i, j]] = v;
            if symmetric {
                values[[j, i]] = v;
            }
        }
        Ok(GramMatrix::new(values, kind))
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn is_square(&self) -> bool {
        self.values.nrows() == self.values.ncols()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::mismatch("eigenvalues of a rectangular Gram matrix"));
        }
        let n = self.values.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.values[[i, j]] + self.values[[j, i]]));
        Ok(m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Symmetric with smallest eigenvalue `≥ −1e−8 · trace`.
    pub fn is_psd(&self) -> Result<bool> {
        let v = &self.values;
        if !self.is_square() {
            return Ok(false);
        }
        let n = v.nrows();
        let symmetric = (0..n).all(|i| (0..i).all(|j| (v[[i, j]] - v[[j, i]]).abs() <= 1e-12 * (1.0 + v[[i, j]].abs())));
        let trace: f64 = v.diag().sum();
        Ok(symmetric && self.min_eigenvalue()? >= -1e-8 * trace)
    }

    pub fn format(&self) -> String {
        let mut out = format!(
            "#gram kind={} n={} m={}\n",
            self.kind,
            self.values.nrows(),
            self.values.ncols()
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
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing #gram header".into()))?;
        let header = header
            .trim()
            .strip_prefix("#gram")
            .ok_or_else(|| err(hl + 1, "expected `#gram` header".into()))?;
        let (mut kind, mut n, mut m) = (String::new(), None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("kind", v)) => kind = v.to_string(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("m", v)) => m = v.parse::<usize>().ok(),
                _ => return Err(err(hl + 1, format!("malformed header field `{field}`"))),
            }
        }
        let (n, m) = n.zip(m).ok_or_else(|| err(hl + 1, "header needs n= and m=".into()))?;
        let mut values = Array2::zeros((n, m));
        let mut row = 0;
        for (idx, line) in lines {
            if row == n {
                return Err(err(idx + 1, format!("more than {n} rows")));
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != m {
                return Err(err(idx + 1, format!("expected {m} values, found {}", cells.len())));
            }
            for (j, c) in cells.iter().enumerate() {
                values[[row, j]] = c
                    .parse()
                    .map_err(|e| err(idx + 1, format!("bad number `{c}`: {e}")))?;
            }
            row += 1;
        }
        if row != n {
            return Err(err(text.lines().count(), format!("expected {n} rows, found {row}")));
        }
        Ok(GramMatrix::new(values, kind))
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }
}
