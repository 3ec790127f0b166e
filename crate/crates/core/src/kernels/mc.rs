use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::reservoir::{draw_gaussian, Activation, Engine, Operator, ReservoirSpec, ReservoirState, Variant};
use crate::rff::RffSpec;
use crate::scalar::Scalar;
use crate::seed::{self, stream};

/// Seed-averaged `(1/N)⟨Z_T(x), Z_T(y)⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Per-seed values in seed order.
    pub samples: Vec<f64>,
}

impl McEstimate {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stderr = if samples.len() > 1 {
            let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        McEstimate { mean, stderr, samples }
    }
}

/// Monte Carlo estimate of the infinite-width kernel of a reservoir.
///
/// Seed `i` uses `derive(spec.seed, MC, i)`; within a seed both paths see
/// the same draws. RF-CDE runs are reduced to the span of the lifted
/// increments of `x` and `y` (see [`rfcde_pair`]).
pub fn mc_kernel_estimate<T: Scalar>(spec: &ReservoirSpec, x: &Path<T>, y: &Path<T>, num_seeds: usize) -> Result<McEstimate> {
    if spec.activation != Activation::Identity {
        return Err(Error::NonIdentityActivation(spec.activation.to_string()));
    }
    if num_seeds == 0 {
        return Err(Error::invalid("monte carlo estimate needs at least one seed"));
    }
    spec.validate()?;
    let n = T::from_count(spec.width);
    let mut samples = Vec::with_capacity(num_seeds);
    for i in 0..num_seeds {
        let mut s = spec.clone();
        s.seed = seed::derive(spec.seed, stream::MC, i as u64);
        let z = match spec.variant {
            Variant::Rfcde => rfcde_pair(&s, x, y)?,
            _ => ReservoirState::<T>::new(&s)?.extract_many(&[x.clone(), y.clone()])?,
        };
        samples.push((z.row(0).dot(&z.row(1)) / n).as_f64());
    }
    Ok(McEstimate::from_samples(samples))
}

/// Terminal RF-CDE states of `x` and `y` for one seed, computed in the
/// subspace spanned by their lifted increments.
///
/// With `Q` an orthonormal basis (rows) of that span, `Σ_i A_i ΔX^i` equals
/// `Σ_j Ã_j (QΔX)^j` with `Ã_j = Σ_i Q_ji A_i`, and the `Ã_j` (likewise the
/// projected biases) are again i.i.d. standard Gaussian. The run therefore has
/// the law of the full `2F`-matrix recursion while drawing only `rank ≤
/// steps_x + steps_y` matrices (fewer once numerically dependent directions,
/// below a relative `1e-10`, are dropped). The draws differ from [`ReservoirState::new`]
/// for the same seed; only the distribution matches.
pub fn rfcde_pair<T: Scalar>(spec: &ReservoirSpec, x: &Path<T>, y: &Path<T>) -> Result<Array2<T>> {
    let rff = RffSpec::<T>::new(
        spec.input_dim,
        spec.num_fourier,
        T::lit(spec.frequency_scale),
        seed::derive(spec.seed, stream::RFF, 0),
    )?;
    let dx = rff.lift_path(x)?.as_path().increments();
    let dy = rff.lift_path(y)?.as_path().increments();
    let q = orthonormal_rows(dx.rows().into_iter().chain(dy.rows()).map(|r| r.to_owned()));
    let rank = q.nrows();
    let drives = [dx.dot(&q.t()), dy.dot(&q.t())];
    let (z0, matrices, biases) = draw_gaussian::<T>(spec.seed, spec.width, rank);
    let engine = Engine {
        width: spec.width,
        op: Operator::Stacked(matrices.view()),
        biases: biases.view(),
        bias_scale: T::lit(spec.sigma_b) / T::from_count(spec.width).sqrt(),
        sigma_a: T::lit(spec.sigma_a),
        activation: spec.activation,
    };
    let start = z0 * T::lit(spec.sigma_0);
    engine.run(start.view(), &[drives[0].view(), drives[1].view()], |_, _| {})
}

/// Relative singular-value cutoff for the lifted-increment subspace.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis (rows) of the numerical span of `vectors`: left
/// singular directions with singular value above `RANK_TOL` times the
/// largest. Discarded directions carry less than that fraction of the driver.
pub(crate) fn orthonormal_rows<T: Scalar>(vectors: impl Iterator<Item = Array1<T>>) -> Array2<T> {
    let vectors: Vec<Array1<T>> = vectors.collect();
    let dim = vectors.first().map_or(0, |v| v.len());
    if vectors.is_empty() || dim == 0 {
        return Array2::zeros((0, dim));
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i].as_f64());
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.max();
    if !(top > 0.0) {
        return Array2::zeros((0, dim));
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > RANK_TOL * top)
        .collect();
    Array2::from_shape_fn((keep.len(), dim), |(r, i)| T::lit(u[(i, keep[r])]))
}
