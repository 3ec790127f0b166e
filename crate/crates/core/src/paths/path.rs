use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A multivariate time series read as a piecewise-linear path.
///
/// `values` is `len × dim`; `times` is strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Path<T = f64> {
    times: Vec<T>,
    values: Array2<T>,
}

impl<T: Scalar> Path<T> {
    pub fn new(times: Vec<T>, values: Array2<T>) -> Result<Self> {
        let len = values.nrows();
        if len < 2 {
            return Err(Error::PathTooShort(len));
        }
        if times.len() != len {
            return Err(Error::InvalidPath(format!(
                "{} timestamps for {} samples",
                times.len(),
                len
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidPath("zero channels".into()));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(format!(
                "times not strictly increasing at sample {}",
                i + 1
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidPath("non-finite timestamp".into()));
        }
        if let Some(((r, c), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPath(format!("non-finite value at ({r}, {c})")));
        }
        Ok(Path { times, values })
    }

    /// Path sampled at `0, 1/(len-1), ..., 1`.
    pub fn from_values(values: Array2<T>) -> Result<Self> {
        let len = values.nrows();
        let times = unit_grid(len);
        Path::new(times, values)
    }

    /// Path sampled at integer times `0..len`.
    pub fn from_index_values(values: Array2<T>) -> Result<Self> {
        let times = (0..values.nrows()).map(T::from_count).collect();
        Path::new(times, values)
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, T> {
        self.values.row(i)
    }

    pub fn into_parts(self) -> (Vec<T>, Array2<T>) {
        (self.times, self.values)
    }

    /// Per-step increments, `(len - 1) × dim`.
    pub fn increments(&self) -> Array2<T> {
        let v = &self.values;
        &v.slice(ndarray::s![1.., ..]) - &v.slice(ndarray::s![..-1, ..])
    }

    /// Samples `start..=end` as a new path (needs at least 2 samples).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if end >= self.len() || end <= start {
            return Err(Error::invalid(format!(
                "slice {start}..={end} of a path with {} samples",
                self.len()
            )));
        }
        Ok(Path {
            times: self.times[start..=end].to_vec(),
            values: self.values.slice(ndarray::s![start..=end, ..]).to_owned(),
        })
    }

    /// Sum of Euclidean segment lengths.
    pub fn total_variation(&self) -> T {
        self.increments()
            .axis_iter(Axis(0))
            .map(|r| r.iter().map(|&x| x * x).sum::<T>().sqrt())
            .sum()
    }

    /// Linear interpolation of the path at time `t` (clamped to the ends).
    pub fn value_at(&self, t: T) -> Vec<T> {
        let n = self.len();
        if t <= self.times[0] {
            return self.values.row(0).to_vec();
        }
        if t >= self.times[n - 1] {
            return self.values.row(n - 1).to_vec();
        }
        let hi = self.times.partition_point(|&s| s <= t).min(n - 1);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        self.values
            .row(lo)
            .iter()
            .zip(self.values.row(hi).iter())
            .map(|(&a, &b)| a + w * (b - a))
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> Path<U> {
        Path {
            times: self.times.iter().map(|&t| U::lit(t.as_f64())).collect(),
            values: self.values.mapv(|v| U::lit(v.as_f64())),
        }
    }
}

pub(crate) fn unit_grid<T: Scalar>(len: usize) -> Vec<T> {
    let denom = T::from_count(len.saturating_sub(1).max(1));
    (0..len).map(|i| T::from_count(i) / denom).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn validates_invariants() {
        assert!(matches!(
            Path::<f64>::from_values(array![[1.0]]),
            Err(Error::PathTooShort(1))
        ));
        assert!(Path::new(vec![0.0, 0.0], array![[1.0], [2.0]]).is_err());
        assert!(Path::new(vec![0.0, 1.0], array![[1.0], [f64::NAN]]).is_err());
        assert!(Path::new(vec![0.0, 1.0, 2.0], array![[1.0], [2.0]]).is_err());
    }

    #[test]
    fn increments_and_variation() {
        let p = Path::from_values(array![[0.0, 0.0], [3.0, 4.0], [3.0, 4.0]]).unwrap();
        assert_eq!(p.increments(), array![[3.0, 4.0], [0.0, 0.0]]);
        assert_eq!(p.total_variation(), 5.0);
        assert_eq!(p.times(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn interpolation() {
        let p = Path::new(vec![0.0, 2.0], array![[0.0], [4.0]]).unwrap();
        assert_eq!(p.value_at(0.5), vec![1.0]);
        assert_eq!(p.value_at(-1.0), vec![0.0]);
        assert_eq!(p.value_at(9.0), vec![4.0]);
    }
}
