//! Dense row-major float tensors.
//!
//! The single canonical layout (flat `Vec<f32>`, row-major) is shared by
//! activations, gradients, parameters, and snapshot files, so loaders and
//! serialization agree bit-exactly.

use crate::error::{Error, Result};

/// An n-dimensional array of `f32` values in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

/// Gradient with respect to a tensor; same layout as the tensor it differentiates.
pub type Gradient = Tensor;

impl Tensor {
    /// Builds a tensor from a shape and flat row-major data.
    pub fn new(shape: impl Into<Vec<usize>>, data: Vec<f32>) -> Result<Self> {
        let shape = shape.into();
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::shape(format!(
                "tensor dimensions must be positive, got {shape:?}"
            )));
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} implies {numel} elements but {} were supplied",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    /// All-zeros tensor. Panics on a degenerate shape; use `new` for fallible paths.
    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "tensor dimensions must be positive, got {shape:?}"
        );
        let numel = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; numel],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Reinterprets the flat data under a new shape with the same element count.
    pub fn reshape(mut self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = shape.into();
        let numel: usize = shape.iter().product();
        if shape.is_empty() || shape.iter().any(|&d| d == 0) || numel != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} ({} elements) into {shape:?}",
                self.shape,
                self.data.len()
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    /// Shape as `(N, C, H, W)`, rejecting other ranks.
    pub fn dims4(&self) -> Result<(usize, usize, usize, usize)> {
        match self.shape[..] {
            [n, c, h, w] => Ok((n, c, h, w)),
            _ => Err(Error::shape(format!(
                "expected a rank-4 tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Shape as `(rows, cols)`, rejecting other ranks.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::shape(format!(
                "expected a rank-2 tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Copies rows `[start, start+len)` along the leading axis.
    pub fn slice_rows(&self, start: usize, len: usize) -> Result<Tensor> {
        let n = self.shape[0];
        if start + len > n || len == 0 {
            return Err(Error::shape(format!(
                "row slice {start}..{} out of bounds for leading dimension {n}",
                start + len
            )));
        }
        let row = self.numel() / n;
        let mut shape = self.shape.clone();
        shape[0] = len;
        Tensor::new(shape, self.data[start * row..(start + len) * row].to_vec())
    }
}

/// Perturbation norms used to measure attack budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// Number of nonzero entries.
    L0,
    /// Euclidean norm.
    L2,
    /// Maximum absolute entry.
    LInf,
}

/// Measures `delta` under the given norm. Always non-negative; zero for the zero tensor.
pub fn norm(delta: &Tensor, p: Norm) -> f32 {
    match p {
        Norm::L0 => delta.data().iter().filter(|&&v| v != 0.0).count() as f32,
        Norm::L2 => {
            let sq: f64 = delta.data().iter().map(|&v| (v as f64) * (v as f64)).sum();
            sq.sqrt() as f32
        }
        Norm::LInf => delta.data().iter().fold(0.0f32, |m, &v| m.max(v.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_rejects_mismatched_length() {
        let err = Tensor::new(vec![2, 3], vec![0.0; 5]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]") && msg.contains('5'), "got: {msg}");
    }

    #[test]
    fn new_rejects_zero_dimension() {
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
    }

    #[test]
    fn reshape_preserves_data() {
        let t = Tensor::new(vec![2, 3], (0..6).map(|i| i as f32).collect()).unwrap();
        let r = t.clone().reshape(vec![3, 2]).unwrap();
        assert_eq!(r.shape(), &[3, 2]);
        assert_eq!(r.data(), t.data());
        assert!(t.reshape(vec![4, 2]).is_err());
    }

    #[test]
    fn slice_rows_copies_leading_axis() {
        let t = Tensor::new(vec![3, 2], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let s = t.slice_rows(1, 2).unwrap();
        assert_eq!(s.shape(), &[2, 2]);
        assert_eq!(s.data(), &[2.0, 3.0, 4.0, 5.0]);
        assert!(t.slice_rows(2, 2).is_err());
    }

    #[test]
    fn norm_l2_three_four_five() {
        let t = Tensor::new(vec![2], vec![3.0, 4.0]).unwrap();
        assert_eq!(norm(&t, Norm::L2), 5.0);
    }

    #[test]
    fn norm_l0_counts_nonzero() {
        let t = Tensor::new(vec![3], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(norm(&t, Norm::L0), 1.0);
    }

    #[test]
    fn norm_linf_max_abs() {
        let t = Tensor::new(vec![2], vec![-1.0, 0.5]).unwrap();
        assert_eq!(norm(&t, Norm::LInf), 1.0);
    }

    proptest! {
        // norm(δ, p) ≥ 0 always; norm(0, p) = 0 for all three p.
        #[test]
        fn norms_nonnegative_and_zero_at_zero(values in proptest::collection::vec(-1e3f32..1e3, 1..64)) {
            let n = values.len();
            let t = Tensor::new(vec![n], values).unwrap();
            for p in [Norm::L0, Norm::L2, Norm::LInf] {
                prop_assert!(norm(&t, p) >= 0.0);
            }
            let z = Tensor::zeros(vec![n]);
            for p in [Norm::L0, Norm::L2, Norm::LInf] {
                prop_assert_eq!(norm(&z, p), 0.0);
            }
        }
    }
}
