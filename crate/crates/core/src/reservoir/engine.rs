//! Lockstep Euler recursion shared by the three reservoir variants.
//!
//! Every variant advances `z ← z + σ_A Σ_k c_k M_k φ(z) + s_b Σ_{k<D_b} c_k b_k`
//! where `c` is the per-step driver (path increments, lifted increments or
//! log-signature coordinates). Samples are advanced together so the matrix
//! products become one matrix–matrix product per step; samples with fewer
//! steps are padded with zero drivers, which leave the state untouched.

use ndarray::{s, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::spec::Activation;

const OVERFLOW: f64 = 1e100;
/// Below this many rows the product is done as streamed dot products, which
/// reads each matrix row once and avoids packing the whole stack per step.
const SMALL_BATCH: usize = 8;

pub(crate) enum Operator<'a, T> {
    /// Stacked `(K·N) × N` blocks; driver coordinate `k` selects block `k`.
    Stacked(ArrayView2<'a, T>),
    /// Letter blocks `(d·N) × N`; driver coordinates are the tensor
    /// coordinates of levels `1..=depth` in rank order, and word `i₁…i_k`
    /// acts as `M_{i₁}⋯M_{i_k}`.
    Words {
        letters: ArrayView2<'a, T>,
        dim: usize,
        depth: usize,
    },
}

pub(crate) struct Engine<'a, T> {
    pub width: usize,
    pub op: Operator<'a, T>,
    /// Bias rows `D_b × N`, paired with the first `D_b` driver coordinates.
    pub biases: ArrayView2<'a, T>,
    pub bias_scale: T,
    pub sigma_a: T,
    pub activation: Activation,
}

/// `rows · mats^T` for `rows: R × N` and `mats: (K·N) × N`.
fn apply<T: Scalar>(rows: ArrayView2<'_, T>, mats: ArrayView2<'_, T>) -> Array2<T> {
    if rows.nrows() > SMALL_BATCH {
        return rows.dot(&mats.t());
    }
    let mut out = Array2::zeros((rows.nrows(), mats.nrows()));
    for (j, m) in mats.outer_iter().enumerate() {
        for (r, x) in rows.outer_iter().enumerate() {
            out[[r, j]] = m.dot(&x);
        }
    }
    out
}

impl<T: Scalar> Engine<'_, T> {
    pub fn num_coeffs(&self) -> usize {
        match self.op {
            Operator::Stacked(m) => m.nrows() / self.width,
            Operator::Words { dim, depth, .. } => (1..=depth).map(|k| dim.pow(k as u32)).sum(),
        }
    }

    /// Runs all `drives` (one `steps × K` array per sample) from the common
    /// start `z_start` and returns the final states, one row per sample.
    /// `observe` sees the states after initialization and after each step.
    pub fn run(
        &self,
        z_start: ArrayView1<'_, T>,
        drives: &[ArrayView2<'_, T>],
        mut observe: impl FnMut(usize, ArrayView2<'_, T>),
    ) -> Result<Array2<T>> {
        let n = self.width;
        let k_total = self.num_coeffs();
        for d in drives {
            if d.ncols() != k_total {
                return Err(Error::mismatch(format!(
                    "driver has {} coordinates, reservoir expects {k_total}",
                    d.ncols()
                )));
            }
        }
        let batch = drives.len();
        let steps = drives.iter().map(|d| d.nrows()).max().unwrap_or(0);
        let mut z = Array2::zeros((batch, n));
        for mut row in z.outer_iter_mut() {
            row.assign(&z_start);
        }
        observe(0, z.view());
        let zero = T::zero();
        let coeff = |b: usize, t: usize, k: usize| -> T {
            let d = &drives[b];
            if t < d.nrows() {
                d[[t, k]]
            } else {
                zero
            }
        };
        for t in 0..steps {
            let active = (0..batch).any(|b| t < drives[b].nrows() && drives[b].row(t).iter().any(|c| !c.is_zero()));
            if !active {
                observe(t + 1, z.view());
                continue;
            }
            let phi = match self.activation {
                Activation::Identity => z.clone(),
                act => z.mapv(|v| act.apply(v)),
            };
            match self.op {
                Operator::Stacked(m) => {
                    let prod = apply(phi.view(), m);
                    for b in 0..batch {
                        for k in 0..k_total {
                            let c = coeff(b, t, k);
                            if !c.is_zero() {
                                z.row_mut(b)
                                    .scaled_add(self.sigma_a * c, &prod.slice(s![b, k * n..(k + 1) * n]));
                            }
                        }
                    }
                }
                Operator::Words { letters, dim, depth } => {
                    // level k holds the row (u·B + b) for word rank u, sample b
                    let mut prev = phi;
                    let mut offset = 0;
                    let mut words_prev = 1;
                    for _level in 1..=depth {
                        let prod = apply(prev.view(), letters);
                        let words = words_prev * dim;
                        let mut next = Array2::zeros((words * batch, n));
                        for i in 0..dim {
                            next.slice_mut(s![i * words_prev * batch..(i + 1) * words_prev * batch, ..])
                                .assign(&prod.slice(s![.., i * n..(i + 1) * n]));
                        }
                        for u in 0..words {
                            for b in 0..batch {
                                let c = coeff(b, t, offset + u);
                                if !c.is_zero() {
                                    z.row_mut(b).scaled_add(self.sigma_a * c, &next.row(u * batch + b));
                                }
                            }
                        }
                        offset += words;
                        words_prev = words;
                        prev = next;
                    }
                }
            }
            if !self.bias_scale.is_zero() {
                for b in 0..batch {
                    for k in 0..self.biases.nrows() {
                        let c = coeff(b, t, k);
                        if !c.is_zero() {
                            z.row_mut(b).scaled_add(self.bias_scale * c, &self.biases.row(k));
                        }
                    }
                }
            }
            let limit = T::lit(OVERFLOW);
            if z.iter().any(|v| !(v.abs() <= limit)) {
                return Err(Error::Overflow {
                    step: t + 1,
                    sigma_a: self.sigma_a.as_f64(),
                });
            }
            observe(t + 1, z.view());
        }
        Ok(z)
    }
}

/// Stacks rows of per-sample drivers into views for [`Engine::run`].
pub(crate) fn views<T>(drives: &[Array2<T>]) -> Vec<ArrayView2<'_, T>> {
    drives.iter().map(|d| d.view()).collect()
}

