use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::Word;

/// Number of coordinates in levels `0..=level` of the tensor algebra over `R^dim`.
pub fn tensor_size(dim: usize, level: usize) -> usize {
    level_offset(dim, level + 1)
}

/// Offset of the first coordinate of `level` in the flat layout.
pub fn level_offset(dim: usize, level: usize) -> usize {
    if dim == 1 {
        level
    } else {
        (dim.pow(level as u32) - 1) / (dim - 1)
    }
}

/// Element of the truncated tensor algebra `T^m(R^d)`.
///
/// Coordinates are stored densely, level by level; within a level the word
/// `i_1...i_k` sits at its base-`d` rank.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTensor<T = f64> {
    dim: usize,
    depth: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedTensor<T> {
    pub fn zeros(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1, "tensor dimension must be positive");
        TruncatedTensor {
            dim,
            depth,
            coeffs: vec![T::zero(); tensor_size(dim, depth)],
        }
    }

    /// The unit `1` (empty-word coefficient one, everything else zero).
    pub fn unit(dim: usize, depth: usize) -> Self {
        let mut t = Self::zeros(dim, depth);
        t.coeffs[0] = T::one();
        t
    }

    /// Level-1 tensor with the given coordinates.
    pub fn from_vector(v: &[T], depth: usize) -> Self {
        let mut t = Self::zeros(v.len(), depth);
        if depth >= 1 {
            t.level_mut(1).copy_from_slice(v);
        }
        t
    }

    pub fn from_flat(dim: usize, depth: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != tensor_size(dim, depth) {
            return Err(Error::mismatch(format!(
                "expected {} coefficients for d={dim}, m={depth}, got {}",
                tensor_size(dim, depth),
                coeffs.len()
            )));
        }
        Ok(TruncatedTensor { dim, depth, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn as_slice(&self) -> &[T] {
        &self.coeffs
    }

    pub fn constant(&self) -> T {
        self.coeffs[0]
    }

    pub fn level(&self, k: usize) -> &[T] {
        let start = level_offset(self.dim, k);
        &self.coeffs[start..start + self.dim.pow(k as u32)]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [T] {
        let start = level_offset(self.dim, k);
        let len = self.dim.pow(k as u32);
        &mut self.coeffs[start..start + len]
    }

    pub fn get(&self, word: &Word) -> T {
        assert!(word.len() <= self.depth, "word longer than truncation level");
        self.level(word.len())[word.rank(self.dim)]
    }

    pub fn set(&mut self, word: &Word, value: T) {
        assert!(word.len() <= self.depth, "word longer than truncation level");
        let rank = word.rank(self.dim);
        self.level_mut(word.len())[rank] = value;
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(Error::mismatch(format!(
                "tensor (d={}, m={}) vs (d={}, m={})",
                self.dim, self.depth, other.dim, other.depth
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(TruncatedTensor { coeffs, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(TruncatedTensor { coeffs, ..*self })
    }

    pub fn scale(&self, c: T) -> Self {
        TruncatedTensor {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
            ..*self
        }
    }

    /// Tensor (Chen) product truncated at the common level.
    pub fn chen_product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zeros(self.dim, self.depth);
        for k in 0..=self.depth {
            let mut acc = vec![T::zero(); self.dim.pow(k as u32)];
            for i in 0..=k {
                let a = self.level(i);
                let b = other.level(k - i);
                if a.iter().all(|x| x.is_zero()) || b.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let width = b.len();
                for (ia, &ca) in a.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    let row = &mut acc[ia * width..(ia + 1) * width];
                    for (slot, &cb) in row.iter_mut().zip(b) {
                        *slot += ca * cb;
                    }
                }
            }
            out.level_mut(k).copy_from_slice(&acc);
        }
        Ok(out)
    }

    /// Right-multiplies in place by `exp(v)` for a level-1 vector `v`.
    ///
    /// Uses the Horner form
    /// `new_k = (((S_0 v/k + S_1) v/(k-1) + ...) + S_{k-1}) v/1 + S_k`,
    /// processing levels from the top so lower levels are still unmodified.
    pub fn mul_exp_increment(&mut self, v: &[T]) {
        assert_eq!(v.len(), self.dim, "increment dimension mismatch");
        let d = self.dim;
        let mut scratch: Vec<T> = Vec::with_capacity(d.pow(self.depth as u32));
        let mut next: Vec<T> = Vec::with_capacity(d.pow(self.depth as u32));
        for k in (1..=self.depth).rev() {
            scratch.clear();
            scratch.extend_from_slice(self.level(0));
            for j in 1..=k {
                let factor = T::one() / T::from_count(k - j + 1);
                next.clear();
                for &s in scratch.iter() {
                    let s = s * factor;
                    next.extend(v.iter().map(|&vi| s * vi));
                }
                if j < k {
                    for (slot, &c) in next.iter_mut().zip(self.level(j)) {
                        *slot += c;
                    }
                }
                std::mem::swap(&mut scratch, &mut next);
            }
            for (dst, &add) in self.level_mut(k).iter_mut().zip(scratch.iter()) {
                *dst += add;
            }
        }
    }

    /// Truncated exponential `sum_{n=0}^{m} a^n / n!`.
    pub fn exp(&self) -> Result<Self> {
        let c = self.constant();
        if !c.is_zero() {
            return Err(Error::NonzeroConstant(c.as_f64()));
        }
        let mut result = Self::unit(self.dim, self.depth);
        let mut power = Self::unit(self.dim, self.depth);
        for n in 1..=self.depth {
            power = power.chen_product(self)?.scale(T::one() / T::from_count(n));
            result = result.add(&power)?;
        }
        Ok(result)
    }

    /// Truncated logarithm `sum_{n=1}^{m} (-1)^{n-1} (g - 1)^n / n`.
    pub fn log(&self) -> Result<Self> {
        let c = self.constant();
        if (c - T::one()).abs() > T::epsilon() * T::lit(16.0) {
            return Err(Error::NonUnitConstant(c.as_f64()));
        }
        let mut x = self.clone();
        x.coeffs[0] = T::zero();
        let mut result = Self::zeros(self.dim, self.depth);
        let mut power = Self::unit(self.dim, self.depth);
        for n in 1..=self.depth {
            power = power.chen_product(&x)?;
            let sign = if n % 2 == 1 { T::one() } else { -T::one() };
            result = result.add(&power.scale(sign / T::from_count(n)))?;
        }
        Ok(result)
    }

    /// Euclidean inner product over all words up to the truncation level.
    pub fn inner_product(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a * b)
            .sum())
    }

    pub fn level_norm(&self, k: usize) -> T {
        self.level(k).iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    /// Re-truncates at a lower level.
    pub fn truncate(&self, depth: usize) -> Self {
        assert!(depth <= self.depth);
        TruncatedTensor {
            dim: self.dim,
            depth,
            coeffs: self.coeffs[..tensor_size(self.dim, depth)].to_vec(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> TruncatedTensor<U> {
        TruncatedTensor {
            dim: self.dim,
            depth: self.depth,
            coeffs: self.coeffs.iter().map(|&c| U::lit(c.as_f64())).collect(),
        }
    }
}
