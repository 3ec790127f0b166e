use crate::error::{Error, Result};
use crate::paths::Path;
use crate::scalar::Scalar;

use super::{LieElement, LyndonBasis, TruncatedTensor};
use std::sync::Arc;

/// Level-`depth` signature of a piecewise-linear path: the Chen product of
/// the exponentials of its increments.
pub fn signature<T: Scalar>(path: &Path<T>, depth: usize) -> Result<TruncatedTensor<T>> {
    if depth == 0 {
        return Err(Error::invalid("signature level must be at least 1"));
    }
    let mut sig = TruncatedTensor::unit(path.dim(), depth);
    let inc = path.increments();
    for row in inc.rows() {
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        let v: Vec<T> = row.to_vec();
        sig.mul_exp_increment(&v);
    }
    Ok(sig)
}

/// Log-signature in Lyndon coordinates.
pub fn log_signature<T: Scalar>(
    path: &Path<T>,
    depth: usize,
    basis: &Arc<LyndonBasis>,
) -> Result<LieElement<T>> {
    if basis.dim() != path.dim() || basis.depth() != depth {
        return Err(Error::mismatch(format!(
            "basis (d={}, m={}) for a path of dimension {} at level {}",
            basis.dim(),
            basis.depth(),
            path.dim(),
            depth
        )));
    }
    let log = signature(path, depth)?.log()?;
    LieElement::from_tensor(Arc::clone(basis), &log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Word;
    use ndarray::array;

    #[test]
    fn linear_path_levels_are_inverse_factorials() {
        let p = Path::new(vec![0.0, 0.3, 0.7, 1.0], array![[0.0], [0.3], [0.7], [1.0]]).unwrap();
        let s = signature(&p, 4).unwrap();
        let expected: [f64; 5] = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (a, b) in s.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_segment_path() {
        let p = Path::from_values(array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = signature(&p, 2).unwrap();
        let w = |l: &[usize]| s.get(&Word::from_one_based(l));
        assert_eq!(w(&[1, 2]), 1.0);
        assert_eq!(w(&[2, 1]), 0.0);
        assert_eq!(w(&[1, 1]), 0.5);
        assert_eq!(w(&[2, 2]), 0.5);

        let basis = LyndonBasis::shared(2, 2);
        let l = log_signature(&p, 2, &basis).unwrap();
        assert_eq!(l.coeffs(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn constant_path_has_unit_signature() {
        let p = Path::from_values(array![[2.0, -1.0], [2.0, -1.0], [2.0, -1.0]]).unwrap();
        assert_eq!(signature(&p, 3).unwrap(), TruncatedTensor::unit(2, 3));
    }

    #[test]
    fn single_segment_log_signature_is_the_increment() {
        let p = Path::from_values(array![[0.1, 0.2, 0.3], [0.6, -0.3, 1.3]]).unwrap();
        let basis = LyndonBasis::shared(3, 3);
        let l = log_signature(&p, 3, &basis).unwrap();
        let inc: [f64; 3] = [0.5, -0.5, 1.0];
        for (i, c) in l.coeffs().iter().enumerate() {
            let expected = if i < 3 { inc[i] } else { 0.0 };
            assert!((c - expected).abs() < 1e-14, "coord {i}: {c}");
        }
    }

    #[test]
    fn basis_mismatch() {
        let p = Path::from_values(array![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let basis = LyndonBasis::shared(3, 2);
        assert!(matches!(log_signature(&p, 2, &basis), Err(Error::Mismatch(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let p = Path::<f32>::from_values(array![[0.0f32, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = signature(&p, 2).unwrap();
        assert_eq!(s.get(&Word::from_one_based(&[1, 2])), 1.0f32);
    }
}
