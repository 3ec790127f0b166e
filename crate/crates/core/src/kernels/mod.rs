//! Signature kernel oracles and the Monte Carlo reservoir kernel estimator.

mod gram;
mod mc;
mod pde;
mod rbf;

pub use gram::GramMatrix;
pub use mc::{mc_kernel_estimate, rfcde_pair, McEstimate};
pub use pde::{
    increment_gram, linear_path_kernel, sig_kernel_pde, sig_kernel_pde_surface, solve_goursat, PdeGrid,
    SchemeOrder,
};
pub use rbf::{rbf_kernel, rbf_lifted_sig_kernel, rbf_lifted_sig_kernel_exact};

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::scalar::Scalar;
use crate::tensor::signature;

/// `⟨S(x), S(y)⟩` with both signatures truncated at level `m`.
pub fn sig_kernel_truncated<T: Scalar>(x: &Path<T>, y: &Path<T>, m: usize) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(Error::mismatch(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    if m == 0 {
        return Ok(T::one());
    }
    signature(x, m)?.inner_product(&signature(y, m)?)
}

/// Gram matrix of the PDE signature kernel.
pub fn sig_pde_gram(xs: &[Path], ys: Option<&[Path]>, grid: PdeGrid) -> Result<GramMatrix> {
    let mut g = GramMatrix::compute("sig-pde", xs, ys, |x, y| sig_kernel_pde(x, y, grid))?;
    g.refinement = Some(grid.refinement);
    Ok(g)
}
