use ndarray::Array2;

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::rff::RffSpec;
use crate::scalar::Scalar;

use super::pde::{solve_goursat, PdeGrid};

/// Gaussian kernel `exp(−‖x − y‖² / 2σ²)`.
pub fn rbf_kernel<T: Scalar>(x: &[T], y: &[T], bandwidth: T) -> T {
    assert_eq!(x.len(), y.len(), "rbf_kernel on points of different dimension");
    assert!(bandwidth > T::zero(), "rbf bandwidth must be positive");
    let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (-d2 / (T::lit(2.0) * bandwidth * bandwidth)).exp()
}

/// Signature kernel of both paths lifted through the same random Fourier
/// feature map.
pub fn rbf_lifted_sig_kernel<T: Scalar>(x: &Path<T>, y: &Path<T>, rff: &RffSpec<T>, grid: PdeGrid) -> Result<T> {
    let lx = rff.lift_path(x)?;
    let ly = rff.lift_path(y)?;
    super::sig_kernel_pde(lx.as_path(), ly.as_path(), grid)
}

/// Infinite-feature limit of [`rbf_lifted_sig_kernel`]: the lifted segment
/// inner products become second mixed differences of the Gaussian kernel,
/// `k(x_{i+1}, y_{j+1}) − k(x_{i+1}, y_j) − k(x_i, y_{j+1}) + k(x_i, y_j)`.
pub fn rbf_lifted_sig_kernel_exact<T: Scalar>(x: &Path<T>, y: &Path<T>, bandwidth: T, grid: PdeGrid) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(Error::mismatch(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    if !(bandwidth > T::zero()) {
        return Err(Error::invalid("rbf bandwidth must be positive"));
    }
    let (lx, ly) = (x.len(), y.len());
    let xs: Vec<Vec<T>> = (0..lx).map(|i| x.row(i).to_vec()).collect();
    let ys: Vec<Vec<T>> = (0..ly).map(|j| y.row(j).to_vec()).collect();
    let k = Array2::from_shape_fn((lx, ly), |(i, j)| rbf_kernel(&xs[i], &ys[j], bandwidth));
    let g = Array2::from_shape_fn((lx - 1, ly - 1), |(i, j)| {
        k[[i + 1, j + 1]] - k[[i + 1, j]] - k[[i, j + 1]] + k[[i, j]]
    });
    Ok(solve_goursat(g.view(), grid, false)?.0)
}
