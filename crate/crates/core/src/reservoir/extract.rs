use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::rff::RffSpec;
use crate::scalar::Scalar;
use crate::tensor::{log_signature, signature, LieElement, LyndonBasis};

use super::engine::{views, Engine, Operator};
use super::spec::Variant;
use super::state::ReservoirState;

/// Log-signatures of consecutive windows of `chunk` steps; the last window
/// may be shorter.
pub fn window_log_signatures<T: Scalar>(
    path: &Path<T>,
    basis: &Arc<LyndonBasis>,
    chunk: usize,
) -> Result<Vec<LieElement<T>>> {
    window_bounds(path.len(), chunk)?
        .into_iter()
        .map(|(a, b)| log_signature(&path.slice(a, b)?, basis.depth(), basis))
        .collect()
}

/// Sample index pairs `(start, end)` of each window, inclusive.
pub fn window_bounds(len: usize, chunk: usize) -> Result<Vec<(usize, usize)>> {
    if chunk == 0 {
        return Err(Error::invalid("chunk size must be >= 1"));
    }
    let steps = len.saturating_sub(1);
    if steps < chunk {
        return Err(Error::ChunkTooLong { chunk, steps });
    }
    Ok((0..steps)
        .step_by(chunk)
        .map(|a| (a, (a + chunk).min(steps)))
        .collect())
}

impl<T: Scalar> ReservoirState<T> {
    fn check_input(&self, path: &Path<T>) -> Result<()> {
        if path.dim() != self.spec.input_dim {
            return Err(Error::mismatch(format!(
                "path has {} channels, reservoir expects {}",
                path.dim(),
                self.spec.input_dim
            )));
        }
        Ok(())
    }

    /// Per-update driver coordinates of `path`, one row per update.
    pub(crate) fn driver(&self, path: &Path<T>) -> Result<Array2<T>> {
        self.check_input(path)?;
        match self.spec.variant {
            Variant::Rcde => Ok(path.increments()),
            Variant::Rfcde => {
                let rff = self.rff.as_ref().expect("RF-CDE state carries its RFF map");
                Ok(rff.lift_path(path)?.as_path().increments())
            }
            Variant::Rrde => {
                let basis = self.basis.as_ref().expect("R-RDE state carries its basis");
                let bounds = window_bounds(path.len(), self.spec.chunk_size)?;
                let dense = self.commutators.is_some();
                let width = if dense {
                    basis.len()
                } else {
                    crate::tensor::tensor_size(basis.dim(), basis.depth()) - 1
                };
                let mut out = Array2::zeros((bounds.len(), width));
                for (row, &(a, b)) in bounds.iter().enumerate() {
                    let window = path.slice(a, b)?;
                    let log = signature(&window, basis.depth())?.log()?;
                    if dense {
                        let coeffs = basis.project(&log)?;
                        out.row_mut(row).assign(&Array1::from(coeffs));
                    } else {
                        out.row_mut(row)
                            .assign(&ndarray::ArrayView1::from(&log.as_slice()[1..]));
                    }
                }
                Ok(out)
            }
        }
    }

    pub(crate) fn engine(&self) -> Engine<'_, T> {
        let n = self.spec.width;
        let op = match (&self.spec.variant, &self.commutators) {
            (Variant::Rrde, Some(table)) => Operator::Stacked(table.view()),
            (Variant::Rrde, None) => Operator::Words {
                letters: self.matrices.view(),
                dim: self.spec.input_dim,
                depth: self.spec.level,
            },
            _ => Operator::Stacked(self.matrices.view()),
        };
        Engine {
            width: n,
            op,
            biases: self.biases.view(),
            bias_scale: self.bias_scale(),
            sigma_a: T::lit(self.spec.sigma_a),
            activation: self.spec.activation,
        }
    }

    pub(crate) fn start(&self) -> Array1<T> {
        &self.z0 * T::lit(self.spec.sigma_0)
    }

    /// Terminal state `Z_T` for one path.
    pub fn extract(&self, path: &Path<T>) -> Result<Array1<T>> {
        let drive = self.driver(path)?;
        let z = self.engine().run(self.start().view(), &[drive.view()], |_, _| {})?;
        Ok(z.row(0).to_owned())
    }

    /// Terminal states for several paths advanced in lockstep, one row each.
    pub fn extract_many(&self, paths: &[Path<T>]) -> Result<Array2<T>> {
        let drives = paths
            .iter()
            .enumerate()
            .map(|(i, p)| self.driver(p).map_err(|e| e.at_sample(i)))
            .collect::<Result<Vec<_>>>()?;
        self.engine().run(self.start().view(), &views(&drives), |_, _| {})
    }

    /// States after initialization and after every update (per step, or per
    /// window for R-RDE), one row each.
    pub fn trajectory(&self, path: &Path<T>) -> Result<Array2<T>> {
        let drive = self.driver(path)?;
        let mut out = Array2::zeros((drive.nrows() + 1, self.spec.width));
        self.engine().run(self.start().view(), &[drive.view()], |t, z| {
            out.row_mut(t).assign(&z.row(0));
        })?;
        Ok(out)
    }
}

fn expect_variant<T>(state: &ReservoirState<T>, variant: Variant) -> Result<()> {
    if state.spec.variant != variant {
        return Err(Error::mismatch(format!(
            "{} extraction on a {} reservoir",
            variant, state.spec.variant
        )));
    }
    Ok(())
}

/// Euler recursion driven by the raw path increments.
pub fn rcde_extract<T: Scalar>(state: &ReservoirState<T>, path: &Path<T>) -> Result<Array1<T>> {
    expect_variant(state, Variant::Rcde)?;
    state.extract(path)
}

/// Euler recursion driven by the increments of the path lifted through `rff`.
pub fn rfcde_extract<T: Scalar>(state: &ReservoirState<T>, rff: &RffSpec<T>, path: &Path<T>) -> Result<Array1<T>> {
    expect_variant(state, Variant::Rfcde)?;
    if rff.output_dim() != state.num_matrices() {
        return Err(Error::mismatch(format!(
            "RFF map has {} outputs, reservoir has {} driving matrices",
            rff.output_dim(),
            state.num_matrices()
        )));
    }
    state.check_input(path)?;
    let drive = rff.lift_path(path)?.as_path().increments();
    let z = state.engine().run(state.start().view(), &[drive.view()], |_, _| {})?;
    Ok(z.row(0).to_owned())
}

/// Log-ODE recursion over windows of `chunk_size` steps.
pub fn rrde_extract<T: Scalar>(state: &ReservoirState<T>, path: &Path<T>) -> Result<Array1<T>> {
    expect_variant(state, Variant::Rrde)?;
    state.extract(path)
}
