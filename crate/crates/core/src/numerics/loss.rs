use super::Scalar;
use crate::error::{invalid, Result};

/// Numerically stable softmax, in place.
pub fn softmax_in_place<T: Scalar>(v: &mut [T]) {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let mut z = T::zero();
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        z += *x;
    }
    for x in v.iter_mut() {
        *x /= z;
    }
}

pub fn log_softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = logits.iter().map(|&x| (x - max).exp()).sum::<T>().ln() + max;
    logits.iter().map(|&x| x - lse).collect()
}

/// Cross-entropy of `softmax(logits)` against `target_index`, with the
/// gradient with respect to the logits.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], target_index: usize) -> Result<(T, Vec<T>)> {
    if target_index >= logits.len() {
        return Err(invalid(format!(
            "target index {target_index} out of range for {} logits",
            logits.len()
        )));
    }
    let logp = log_softmax(logits);
    let loss = -logp[target_index];
    let mut grad: Vec<T> = logp.iter().map(|&l| l.exp()).collect();
    grad[target_index] -= T::one();
    Ok((loss, grad))
}
