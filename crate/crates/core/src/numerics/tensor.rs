use rand::Rng;

use super::Scalar;
use crate::error::{invalid, Result};

/// Row-major dense tensor. Only rank 1 and rank 2 are used by the model.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(invalid(format!("tensor shape {shape:?} has a zero dimension")));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(invalid(format!(
                "tensor shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn from_vec(data: Vec<T>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| T::of(rng.gen_range(-bound..=bound))).collect();
        Self {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Number of columns; 1 for vectors.
    pub fn cols(&self) -> usize {
        self.shape.get(1).copied().unwrap_or(1)
    }

    pub fn row(&self, i: usize) -> &[T] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v.as_f64() * v.as_f64()).sum()
    }

    pub fn scale(&mut self, k: T) {
        self.data.iter_mut().for_each(|v| *v *= k);
    }

    /// `self += other`, shapes must agree.
    pub fn add_assign(&mut self, other: &Tensor<T>) -> Result<()> {
        if self.shape != other.shape {
            return Err(invalid(format!("shape mismatch {:?} vs {:?}", self.shape, other.shape)));
        }
        axpy(T::one(), &other.data, &mut self.data);
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    /// `out = W x` for a matrix `W` of shape `[r, c]`.
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        let c = self.cols();
        debug_assert_eq!(x.len(), c);
        debug_assert_eq!(out.len(), self.rows());
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(c)) {
            *o = dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows()];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out += Wᵀ y`.
    pub fn matvec_t_acc(&self, y: &[T], out: &mut [T]) {
        let c = self.cols();
        debug_assert_eq!(y.len(), self.rows());
        debug_assert_eq!(out.len(), c);
        for (&yi, row) in y.iter().zip(self.data.chunks_exact(c)) {
            if yi != T::zero() {
                axpy(yi, row, out);
            }
        }
    }

    /// `W += a bᵀ`.
    pub fn add_outer(&mut self, a: &[T], b: &[T]) {
        let c = self.cols();
        debug_assert_eq!(a.len(), self.rows());
        debug_assert_eq!(b.len(), c);
        for (&ai, row) in a.iter().zip(self.data.chunks_exact_mut(c)) {
            if ai != T::zero() {
                axpy(ai, b, row);
            }
        }
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
/// Summation order is fixed, so results are reproducible.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (xa, xb) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += xa[k] * xb[k];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`.
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_value_count() {
        assert!(Tensor::<f32>::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::<f32>::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn matvec_and_transpose() {
        let w = Tensor::new(vec![2, 3], vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(w.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        let mut out = vec![0.0; 3];
        w.matvec_t_acc(&[1.0, 1.0], &mut out);
        assert_eq!(out, vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn dot_matches_naive_sum_on_long_vectors() {
        let a: Vec<f64> = (0..29).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..29).map(|i| 1.0 - i as f64 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }

    #[test]
    fn outer_product_accumulates() {
        let mut w = Tensor::<f64>::zeros(&[2, 2]);
        w.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(w.data(), &[3.0, 4.0, 6.0, 8.0]);
    }
}
