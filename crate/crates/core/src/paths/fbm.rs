//! Fractional Brownian motion on `[0, 1]`.
//!
//! `E[B_t B_s] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`
//!
//! Samples are produced by circulant embedding of the fractional Gaussian
//! noise autocovariance (Davies–Harte); if the embedding has a materially
//! negative eigenvalue the exact Cholesky factor of the fBm covariance is
//! used instead.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::Path;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    #[default]
    DaviesHarte,
    Cholesky,
}

pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (s.abs().powf(h2) + t.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

fn check_args(hurst: f64, len: usize) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::invalid(format!("Hurst exponent {hurst} outside (0, 1)")));
    }
    if len < 2 {
        return Err(Error::PathTooShort(len));
    }
    Ok(())
}

/// Eigenvalues of the circulant embedding of `n` fGn autocovariances.
fn circulant_eigenvalues(hurst: f64, n: usize) -> Result<Vec<f64>> {
    let m = 2 * n;
    let mut c: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    for j in 0..=n {
        c[j].re = fgn_autocovariance(hurst, j);
    }
    for j in 1..n {
        c[m - j].re = fgn_autocovariance(hurst, j);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut c);
    let max = c.iter().map(|z| z.re).fold(0.0f64, f64::max);
    let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min < -1e-10 * max.max(1.0) {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(c.iter().map(|z| z.re.max(0.0)).collect())
}

/// `len` samples of one fBm channel at `0, 1/(len-1), ..., 1` by Davies–Harte.
pub fn fbm_davies_harte<R: Rng + ?Sized>(hurst: f64, len: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_args(hurst, len)?;
    let n = len - 1;
    let m = 2 * n;
    let lambda = circulant_eigenvalues(hurst, n)?;
    let mut a: Vec<Complex<f64>> = lambda
        .iter()
        .map(|&l| {
            let s = (l / m as f64).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(s * re, s * im)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut a);
    let scale = (1.0 / n as f64).powf(hurst);
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    out.push(0.0);
    for z in a.iter().take(n) {
        acc += z.re * scale;
        out.push(acc);
    }
    Ok(out)
}

/// `len` samples of one fBm channel from the Cholesky factor of its covariance.
pub fn fbm_cholesky<R: Rng + ?Sized>(hurst: f64, len: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_args(hurst, len)?;
    let n = len - 1;
    let t = |i: usize| (i + 1) as f64 / n as f64;
    let cov = DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, t(i), t(j)));
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = chol.l() * z;
    let mut out = Vec::with_capacity(len);
    out.push(0.0);
    out.extend(x.iter().copied());
    Ok(out)
}

/// Samples one channel with the requested method; Davies–Harte falls back
/// to Cholesky when the circulant embedding is not nonnegative definite.
pub fn fbm_channel<R: Rng + ?Sized>(
    hurst: f64,
    len: usize,
    method: FbmMethod,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match method {
        FbmMethod::Cholesky => fbm_cholesky(hurst, len, rng),
        FbmMethod::DaviesHarte => match fbm_davies_harte(hurst, len, rng) {
            Err(Error::NegativeEigenvalue(v)) => {
                log::warn!(
                    "Davies-Harte embedding has eigenvalue {v:e} (H={hurst}, len={len}); using Cholesky"
                );
                fbm_cholesky(hurst, len, rng)
            }
            other => other,
        },
    }
}

/// `dim` independent fBm channels at `len` equispaced times on `[0, 1]`.
pub fn generate_fbm(hurst: f64, len: usize, dim: usize, seed: u64) -> Result<Path> {
    generate_fbm_with(hurst, len, dim, seed, FbmMethod::DaviesHarte)
}

pub fn generate_fbm_with(
    hurst: f64,
    len: usize,
    dim: usize,
    seed: u64,
    method: FbmMethod,
) -> Result<Path> {
    check_args(hurst, len)?;
    if dim == 0 {
        return Err(Error::invalid("fBm needs at least one channel"));
    }
    let mut rng = seed::rng(seed);
    let mut values = Array2::zeros((len, dim));
    for c in 0..dim {
        let channel = fbm_channel(hurst, len, method, &mut rng)?;
        for (t, v) in channel.into_iter().enumerate() {
            values[[t, c]] = v;
        }
    }
    Path::from_values(values)
}
