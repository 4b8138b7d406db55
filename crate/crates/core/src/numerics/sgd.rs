use super::{Scalar, Tensor};
use crate::error::{invalid, Result};

pub fn global_norm<T: Scalar>(grads: &[&Tensor<T>]) -> f64 {
    grads.iter().map(|g| g.sum_squares()).sum::<f64>().sqrt()
}

/// Rescales `grads` in place so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<T: Scalar>(grads: &mut [&mut Tensor<T>], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g.sum_squares()).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let k = T::of(max_norm / norm);
        for g in grads.iter_mut() {
            g.scale(k);
        }
    }
    norm
}

/// Plain SGD update `p -= lr * g`, after optional global-norm clipping of
/// the gradients. Returns the gradient norm before clipping.
pub fn sgd_step<T: Scalar>(
    params: &mut [&mut Tensor<T>],
    grads: &[&Tensor<T>],
    lr: f64,
    clip: Option<f64>,
) -> Result<f64> {
    if params.len() != grads.len() {
        return Err(invalid(format!(
            "{} parameter tensors but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    for (p, g) in params.iter().zip(grads) {
        if p.shape() != g.shape() {
            return Err(invalid(format!(
                "gradient shape {:?} does not match parameter shape {:?}",
                g.shape(),
                p.shape()
            )));
        }
    }
    let norm = global_norm(grads);
    let scale = match clip {
        Some(c) if norm > c && norm > 0.0 => c / norm,
        _ => 1.0,
    };
    let step = T::of(-lr * scale);
    for (p, g) in params.iter_mut().zip(grads) {
        super::axpy(step, g.data(), p.data_mut());
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_leaves_params() {
        let mut p = Tensor::from_vec(vec![1.0f32, 2.0]);
        let g = Tensor::from_vec(vec![3.0f32, -4.0]);
        sgd_step(&mut [&mut p], &[&g], 0.0, Some(5.0)).unwrap();
        assert_eq!(p.data(), &[1.0, 2.0]);
    }

    #[test]
    fn plain_update() {
        let mut p = Tensor::from_vec(vec![1.0f64, 2.0]);
        let g = Tensor::from_vec(vec![1.0f64, 1.0]);
        sgd_step(&mut [&mut p], &[&g], 0.5, None).unwrap();
        assert_eq!(p.data(), &[0.5, 1.5]);
    }

    #[test]
    fn clipping_halves_a_norm_ten_gradient() {
        let mut p = Tensor::from_vec(vec![0.0f64, 0.0]);
        let g = Tensor::from_vec(vec![6.0f64, 8.0]);
        let norm = sgd_step(&mut [&mut p], &[&g], 1.0, Some(5.0)).unwrap();
        assert_eq!(norm, 10.0);
        assert_eq!(p.data(), &[-3.0, -4.0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Tensor::from_vec(vec![0.0f32; 2]);
        let g = Tensor::from_vec(vec![0.0f32; 3]);
        assert!(sgd_step(&mut [&mut p], &[&g], 1.0, None).is_err());
    }
}
