use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeOrder {
    First,
    #[default]
    Second,
}

/// Finite-difference grid for the Goursat problem: each input segment pair
/// is split into `refinement × refinement` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PdeGrid {
    pub refinement: usize,
    #[serde(default)]
    pub order: SchemeOrder,
}

impl Default for PdeGrid {
    fn default() -> Self {
        PdeGrid {
            refinement: 8,
            order: SchemeOrder::Second,
        }
    }
}

impl PdeGrid {
    pub fn new(refinement: usize, order: SchemeOrder) -> Result<Self> {
        let g = PdeGrid { refinement, order };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.refinement == 0 {
            return Err(Error::invalid("PDE refinement must be >= 1"));
        }
        Ok(())
    }
}

/// `⟨Δx_i, Δy_j⟩` for all segment pairs.
pub fn increment_gram<T: Scalar>(x: &Path<T>, y: &Path<T>) -> Result<Array2<T>> {
    if x.dim() != y.dim() {
        return Err(Error::mismatch(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(x.increments().dot(&y.increments().t()))
}

/// Signature kernel `K(T_x, T_y)` by the Goursat PDE.
pub fn sig_kernel_pde<T: Scalar>(x: &Path<T>, y: &Path<T>, grid: PdeGrid) -> Result<T> {
    let g = increment_gram(x, y)?;
    Ok(solve_goursat(g.view(), grid, false)?.0)
}

/// `K(t_i, s_j)` at every pair of original sample times, shape `ℓ_x × ℓ_y`.
pub fn sig_kernel_pde_surface<T: Scalar>(x: &Path<T>, y: &Path<T>, grid: PdeGrid) -> Result<Array2<T>> {
    let g = increment_gram(x, y)?;
    Ok(solve_goursat(g.view(), grid, true)?.1.expect("surface requested"))
}

/// Solves the Goursat problem for a piecewise-constant source given by the
/// segment inner products `g` (shape `segments_x × segments_y`).
///
/// On a cell with increment `c = g_ij / r²` the second-order update is
/// `K₁₁ = (K₁₀ + K₀₁)(1 + c/2 + c²/12) − K₀₀(1 − c²/12)`, the first-order one
/// `K₁₁ = K₁₀ + K₀₁ + K₀₀(c − 1)`.
pub fn solve_goursat<T: Scalar>(
    g: ArrayView2<'_, T>,
    grid: PdeGrid,
    keep_surface: bool,
) -> Result<(T, Option<Array2<T>>)> {
    grid.validate()?;
    let (sx, sy) = g.dim();
    let r = grid.refinement;
    let cols = sy * r + 1;
    let one = T::one();
    let mut prev = vec![one; cols];
    let mut cur = vec![one; cols];
    let mut surface = keep_surface.then(|| Array2::from_elem((sx + 1, sy + 1), one));
    let inv_r2 = one / T::from_count(r * r);
    let (half, twelfth) = (T::lit(0.5), T::lit(1.0 / 12.0));
    for i in 0..sx * r {
        let gi = g.row(i / r);
        cur[0] = one;
        for j in 0..sy * r {
            let c = gi[j / r] * inv_r2;
            cur[j + 1] = match grid.order {
                SchemeOrder::Second => {
                    let c2 = c * c * twelfth;
                    (cur[j] + prev[j + 1]) * (one + c * half + c2) - prev[j] * (one - c2)
                }
                SchemeOrder::First => cur[j] + prev[j + 1] + prev[j] * (c - one),
            };
        }
        if let Some(s) = surface.as_mut() {
            if (i + 1) % r == 0 {
                for jc in 0..=sy {
                    s[[(i + 1) / r, jc]] = cur[jc * r];
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok((prev[cols - 1], surface))
}

/// Signature kernel of two linear segments with `⟨Δx, Δy⟩ = c`:
/// `Σ_k c^k / (k!)²`, summed to `k = 30`.
pub fn linear_path_kernel(c: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=30 {
        term *= c / (k * k) as f64;
        sum += term;
    }
    sum
}
