//! Random Fourier features for the Gaussian (RBF) kernel and the pointwise
//! lift of paths through them.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::scalar::Scalar;
use crate::seed;

/// Frozen random Fourier feature map `R^d -> R^{2F}`.
///
/// Frequencies are `frequency_scale * N(0, I_d)` draws, so inner products
/// of features approximate `exp(-frequency_scale^2 |x - y|^2 / 2)`. The
/// output interleaves `(cos, sin)` per frequency and is scaled by `1/sqrt(F)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RffSpec<T = f64> {
    input_dim: usize,
    num_features: usize,
    frequency_scale: T,
    seed: u64,
    frequencies: Array2<T>,
}

impl<T: Scalar> RffSpec<T> {
    pub fn new(input_dim: usize, num_features: usize, frequency_scale: T, seed: u64) -> Result<Self> {
        if input_dim == 0 || num_features == 0 {
            return Err(Error::invalid("RFF needs positive input dimension and feature count"));
        }
        if !(frequency_scale > T::zero()) {
            return Err(Error::invalid(format!(
                "frequency scale must be positive, got {frequency_scale}"
            )));
        }
        let mut rng = seed::rng(seed);
        let frequencies = Array2::from_shape_simple_fn((num_features, input_dim), || {
            frequency_scale * T::lit(rng.sample::<f64, _>(StandardNormal))
        });
        Ok(RffSpec {
            input_dim,
            num_features,
            frequency_scale,
            seed,
            frequencies,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Output dimension `2F`.
    pub fn output_dim(&self) -> usize {
        2 * self.num_features
    }

    pub fn frequency_scale(&self) -> T {
        self.frequency_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frequencies(&self) -> &Array2<T> {
        &self.frequencies
    }

    fn map_into(&self, x: ArrayView1<'_, T>, out: &mut [T]) {
        let norm = T::one() / T::from_count(self.num_features).sqrt();
        for (j, w) in self.frequencies.rows().into_iter().enumerate() {
            let phase = w.dot(&x);
            out[2 * j] = norm * phase.cos();
            out[2 * j + 1] = norm * phase.sin();
        }
    }

    pub fn map(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.input_dim {
            return Err(Error::mismatch(format!(
                "RFF input of dimension {} for a map on R^{}",
                x.len(),
                self.input_dim
            )));
        }
        let mut out = vec![T::zero(); self.output_dim()];
        self.map_into(ArrayView1::from(x), &mut out);
        Ok(out)
    }

    /// Applies the map to every sample; timestamps are kept.
    pub fn lift_path(&self, path: &Path<T>) -> Result<LiftedPath<T>> {
        if path.dim() != self.input_dim {
            return Err(Error::mismatch(format!(
                "path of dimension {} lifted by an RFF map on R^{}",
                path.dim(),
                self.input_dim
            )));
        }
        let mut values = Array2::zeros((path.len(), self.output_dim()));
        for (i, mut row) in values.rows_mut().into_iter().enumerate() {
            self.map_into(path.row(i), row.as_slice_mut().expect("contiguous row"));
        }
        Ok(LiftedPath(Path::new(path.times().to_vec(), values)?))
    }
}

/// Path in `R^{2F}` obtained by lifting every sample through an [`RffSpec`];
/// every row has unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPath<T = f64>(Path<T>);

impl<T: Scalar> LiftedPath<T> {
    pub fn as_path(&self) -> &Path<T> {
        &self.0
    }

    pub fn into_path(self) -> Path<T> {
        self.0
    }
}

/// Convenience wrapper for [`RffSpec::lift_path`].
pub fn lift_path<T: Scalar>(spec: &RffSpec<T>, path: &Path<T>) -> Result<LiftedPath<T>> {
    spec.lift_path(path)
}
