use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rff::RffSpec;
use crate::scalar::Scalar;
use crate::seed::{self, stream};
use crate::tensor::{Bracket, LyndonBasis};

use super::spec::{ReservoirSpec, Variant};

/// Frozen random draws of a reservoir.
///
/// Matrices are stored stacked, `(D·N) × N`, already divided by `√N`; block
/// `k` is `A_k / √N`. The bias rows and `z₀` are raw standard normals and get
/// their scales (`σ_b`, `σ_0`) at use sites.
#[derive(Clone, Debug)]
pub struct ReservoirState<T = f64> {
    pub(crate) spec: ReservoirSpec,
    pub(crate) z0: Array1<T>,
    pub(crate) matrices: Array2<T>,
    pub(crate) biases: Array2<T>,
    pub(crate) rff: Option<RffSpec<T>>,
    pub(crate) basis: Option<Arc<LyndonBasis>>,
    /// Dense `B^(w)` table for R-RDE, stacked like `matrices` in basis order.
    pub(crate) commutators: Option<Array2<T>>,
}

/// Draws `z₀` (N), then `count` matrices row-major, then `count` bias
/// vectors, all from one stream.
pub(crate) fn draw_gaussian<T: Scalar>(seed: u64, width: usize, count: usize) -> (Array1<T>, Array2<T>, Array2<T>) {
    let mut rng = seed::rng(seed::derive(seed, stream::RESERVOIR, 0));
    let mut normal = || T::lit(rng.sample::<f64, _>(StandardNormal));
    let z0 = Array1::from_shape_simple_fn(width, &mut normal);
    let inv_sqrt = T::one() / T::from_count(width).sqrt();
    let matrices = Array2::from_shape_simple_fn((count * width, width), || normal() * inv_sqrt);
    let biases = Array2::from_shape_simple_fn((count, width), &mut normal);
    (z0, matrices, biases)
}

impl<T: Scalar> ReservoirState<T> {
    pub fn new(spec: &ReservoirSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.width;
        let count = match spec.variant {
            Variant::Rcde | Variant::Rrde => spec.input_dim,
            Variant::Rfcde => 2 * spec.num_fourier,
        };
        let (z0, matrices, biases) = draw_gaussian(spec.seed, n, count);
        let rff = match spec.variant {
            Variant::Rfcde => Some(RffSpec::new(
                spec.input_dim,
                spec.num_fourier,
                T::lit(spec.frequency_scale),
                seed::derive(spec.seed, stream::RFF, 0),
            )?),
            _ => None,
        };
        let mut state = ReservoirState {
            spec: spec.clone(),
            z0,
            matrices,
            biases,
            rff,
            basis: None,
            commutators: None,
        };
        if spec.variant == Variant::Rrde {
            let basis = LyndonBasis::shared(spec.input_dim, spec.level);
            if spec.dense_commutators() {
                state.commutators = Some(commutator_table(&state.matrices, n, &basis));
            }
            state.basis = Some(basis);
        }
        Ok(state)
    }

    pub fn spec(&self) -> &ReservoirSpec {
        &self.spec
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    /// Unscaled initial state draw; the recursion starts from `σ_0 z₀`.
    pub fn initial_state(&self) -> ArrayView1<'_, T> {
        self.z0.view()
    }

    /// Replaces `z₀`, keeping every other draw.
    pub fn with_initial_state(mut self, z0: Array1<T>) -> Result<Self> {
        if z0.len() != self.spec.width {
            return Err(Error::mismatch(format!(
                "initial state of length {} for width {}",
                z0.len(),
                self.spec.width
            )));
        }
        self.z0 = z0;
        Ok(self)
    }

    pub fn num_matrices(&self) -> usize {
        self.biases.nrows()
    }

    /// `A_k / √N`.
    pub fn scaled_matrix(&self, k: usize) -> ArrayView2<'_, T> {
        let n = self.spec.width;
        self.matrices.slice(s![k * n..(k + 1) * n, ..])
    }

    pub fn bias(&self, k: usize) -> ArrayView1<'_, T> {
        self.biases.row(k)
    }

    pub fn rff(&self) -> Option<&RffSpec<T>> {
        self.rff.as_ref()
    }

    pub fn basis(&self) -> Option<&Arc<LyndonBasis>> {
        self.basis.as_ref()
    }

    /// `B^(w)` for the Lyndon word at `index`, when the dense table exists.
    pub fn commutator(&self, index: usize) -> Option<ArrayView2<'_, T>> {
        let n = self.spec.width;
        self.commutators
            .as_ref()
            .map(|c| c.slice(s![index * n..(index + 1) * n, ..]))
    }

    /// Scale applied to the bias term: `σ_b` for R-CDE and R-RDE, `σ_b/√N`
    /// for RF-CDE where the bias sits inside the `1/√N` sum.
    pub(crate) fn bias_scale(&self) -> T {
        let sb = T::lit(self.spec.sigma_b);
        match self.spec.variant {
            Variant::Rfcde => sb / T::from_count(self.spec.width).sqrt(),
            _ => sb,
        }
    }
}

/// `B^(w) = [B^(u), B^(v)]` over the standard factorization, each letter
/// block already carrying `1/√N`, so a word of length `k` carries `N^{-k/2}`.
pub(crate) fn commutator_table<T: Scalar>(letters: &Array2<T>, n: usize, basis: &LyndonBasis) -> Array2<T> {
    let mut table = Array2::zeros((basis.len() * n, n));
    for (w, bracket) in basis.brackets().iter().enumerate() {
        let m = match *bracket {
            Bracket::Letter(i) => {
                let i = i as usize;
                letters.slice(s![i * n..(i + 1) * n, ..]).to_owned()
            }
            Bracket::Commutator(a, b) => {
                let pa = table.slice(s![a * n..(a + 1) * n, ..]);
                let pb = table.slice(s![b * n..(b + 1) * n, ..]);
                pa.dot(&pb) - pb.dot(&pa)
            }
        };
        table.slice_mut(s![w * n..(w + 1) * n, ..]).assign(&m);
    }
    table
}
