use std::fmt::Write as _;
use std::path::Path as FsPath;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Per-column standardization fitted on training features. Constant
/// columns map to 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub mean: Array1<f64>,
    /// Population standard deviation; 0 marks a constant column.
    pub std: Array1<f64>,
}

impl Normalization {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows() as f64;
        let mean = x.mean_axis(Axis(0)).expect("at least one row");
        let mut std = Array1::zeros(x.ncols());
        for (j, col) in x.columns().into_iter().enumerate() {
            let var = col.iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            // spread below rounding noise counts as constant
            std[j] = if s > 1e-12 * (1.0 + mean[j].abs()) { s } else { 0.0 };
        }
        Normalization { mean, std }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.mean[j], self.std[j]);
            if s > 0.0 {
                col.mapv_inplace(|v| (v - m) / s);
            } else {
                col.fill(0.0);
            }
        }
        out
    }
}

/// One-vs-rest ridge classifier on one-hot targets with an unpenalized
/// intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel {
    /// `C × N`.
    pub weights: Array2<f64>,
    pub intercepts: Array1<f64>,
    pub lambda: f64,
    pub normalization: Option<Normalization>,
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    match x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(Error::NonFiniteFeature { row, col }),
        None => Ok(()),
    }
}

fn cholesky_solve(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Solve("ridge system is not positive definite".into()))?;
    Ok(chol.solve(&b))
}

/// Fits the ridge readout. Solves the primal normal equations when
/// `n ≥ N`, the dual (kernel) form otherwise; both give the same weights.
pub fn fit_ridge(
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    num_classes: usize,
    lambda: f64,
    normalize: bool,
) -> Result<RidgeModel> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("ridge lambda must be > 0, got {lambda}")));
    }
    let (n, p) = features.dim();
    if n != labels.len() {
        return Err(Error::mismatch(format!("{n} feature rows for {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::invalid("no training rows"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::invalid(format!("label {bad} outside 0..{num_classes}")));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass(labels[0]));
    }
    check_finite(features)?;
    let normalization = normalize.then(|| Normalization::fit(features));
    let x = match &normalization {
        Some(norm) => norm.apply(features),
        None => features.to_owned(),
    };
    let x_mean = x.mean_axis(Axis(0)).expect("rows");
    let mut y = Array2::<f64>::zeros((n, num_classes));
    for (i, &l) in labels.iter().enumerate() {
        y[[i, l]] = 1.0;
    }
    let y_mean = y.mean_axis(Axis(0)).expect("rows");
    let xc = DMatrix::from_fn(n, p, |i, j| x[[i, j]] - x_mean[j]);
    let yc = DMatrix::from_fn(n, num_classes, |i, c| y[[i, c]] - y_mean[c]);
    let w = if n >= p {
        let mut a = xc.transpose() * &xc;
        for j in 0..p {
            a[(j, j)] += lambda;
        }
        cholesky_solve(a, xc.transpose() * &yc)?
    } else {
        let mut k = &xc * xc.transpose();
        for i in 0..n {
            k[(i, i)] += lambda;
        }
        xc.transpose() * cholesky_solve(k, yc)?
    };
    let weights = Array2::from_shape_fn((num_classes, p), |(c, j)| w[(j, c)]);
    let intercepts = &y_mean - &weights.dot(&x_mean);
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solve("non-finite ridge weights".into()));
    }
    Ok(RidgeModel {
        weights,
        intercepts,
        lambda,
        normalization,
    })
}

impl RidgeModel {
    pub fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.weights.ncols()
    }

    /// Class scores, `rows × C`.
    pub fn scores(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.num_features() {
            return Err(Error::mismatch(format!(
                "{} feature columns for a model trained on {}",
                features.ncols(),
                self.num_features()
            )));
        }
        let x = match &self.normalization {
            Some(norm) => norm.apply(features),
            None => features.to_owned(),
        };
        Ok(x.dot(&self.weights.t()) + &self.intercepts)
    }

    /// Argmax of the scores; ties go to the lower class index.
    pub fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let scores = self.scores(features)?;
        Ok(scores
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }

    /// `#ridge` header, one row per class (weights then intercept), then the
    /// normalization statistics if present.
    pub fn format(&self) -> String {
        let mut out = format!(
            "#ridge C={} N={} lambda={:e}\n",
            self.num_classes(),
            self.num_features(),
            self.lambda
        );
        let line = |vals: &mut dyn Iterator<Item = f64>| vals.map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(" ");
        for c in 0..self.num_classes() {
            let mut it = self.weights.row(c).to_vec().into_iter().chain([self.intercepts[c]]);
            let _ = writeln!(out, "{}", line(&mut it));
        }
        if let Some(norm) = &self.normalization {
            let _ = writeln!(out, "#mean {}", line(&mut norm.mean.iter().copied()));
            let _ = writeln!(out, "#std {}", line(&mut norm.std.iter().copied()));
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
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing #ridge header".into()))?;
        let header = header
            .trim()
            .strip_prefix("#ridge")
            .ok_or_else(|| err(hl + 1, "expected `#ridge` header".into()))?;
        let (mut c, mut p, mut lambda) = (None, None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("C", v)) => c = v.parse::<usize>().ok(),
                Some(("N", v)) => p = v.parse::<usize>().ok(),
                Some(("lambda", v)) => lambda = v.parse::<f64>().ok(),
                _ => return Err(err(hl + 1, format!("malformed header field `{field}`"))),
            }
        }
        let (c, p, lambda) = match (c, p, lambda) {
            (Some(c), Some(p), Some(l)) => (c, p, l),
            _ => return Err(err(hl + 1, "header needs C=, N= and lambda=".into())),
        };
        let numbers = |idx: usize, s: &str, want: usize| -> Result<Vec<f64>> {
            let v = s
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| err(idx + 1, format!("bad number `{t}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != want {
                return Err(err(idx + 1, format!("expected {want} values, found {}", v.len())));
            }
            Ok(v)
        };
        let mut weights = Array2::zeros((c, p));
        let mut intercepts = Array1::zeros(c);
        for k in 0..c {
            let (idx, l) = lines.next().ok_or_else(|| err(text.lines().count(), format!("missing class row {k}")))?;
            let v = numbers(idx, l, p + 1)?;
            weights.row_mut(k).assign(&Array1::from(v[..p].to_vec()));
            intercepts[k] = v[p];
        }
        let (mut mean, mut std) = (None, None);
        for (idx, l) in lines {
            if let Some(rest) = l.trim().strip_prefix("#mean") {
                mean = Some(Array1::from(numbers(idx, rest, p)?));
            } else if let Some(rest) = l.trim().strip_prefix("#std") {
                std = Some(Array1::from(numbers(idx, rest, p)?));
            } else {
                return Err(err(idx + 1, "unexpected trailing line".into()));
            }
        }
        let normalization = match (mean, std) {
            (Some(mean), Some(std)) => Some(Normalization { mean, std }),
            (None, None) => None,
            _ => return Err(err(text.lines().count(), "normalization needs both #mean and #std".into())),
        };
        Ok(RidgeModel {
            weights,
            intercepts,
            lambda,
            normalization,
        })
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }
}
