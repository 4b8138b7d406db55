use super::Tensor;
use crate::error::{Error, Result};

/// Smallest denominator used when forming relative errors, so that
/// gradients that are zero on both sides compare by absolute difference.
const DENOM_FLOOR: f64 = 1e-6;

/// Compares analytic gradients against central finite differences.
///
/// `loss_and_grad` maps a parameter set to `(loss, gradients)`; it is called
/// once for the analytic gradients and then twice per parameter entry with
/// perturbed copies. Returns the largest elementwise relative error
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn grad_check<F>(mut loss_and_grad: F, params: &[Tensor<f64>], epsilon: f64) -> Result<f64>
where
    F: FnMut(&[Tensor<f64>]) -> (f64, Vec<Tensor<f64>>),
{
    let (loss, analytic) = loss_and_grad(params);
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("loss at the base point is {loss}")));
    }
    if analytic.len() != params.len() {
        return Err(Error::Logic(format!(
            "{} gradient tensors for {} parameters",
            analytic.len(),
            params.len()
        )));
    }
    let mut work = params.to_vec();
    let mut worst: f64 = 0.0;
    for t in 0..params.len() {
        for k in 0..params[t].len() {
            let orig = params[t].data()[k];
            work[t].data_mut()[k] = orig + epsilon;
            let (plus, _) = loss_and_grad(&work);
            work[t].data_mut()[k] = orig - epsilon;
            let (minus, _) = loss_and_grad(&work);
            work[t].data_mut()[k] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss became non-finite perturbing tensor {t} entry {k}"
                )));
            }
            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic[t].data()[k];
            let denom = a.abs().max(numeric.abs()).max(DENOM_FLOOR);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_loss_is_exact() {
        let c = [0.5, -2.0, 3.25, 1.0];
        let theta = Tensor::from_vec(vec![0.1, 0.2, -0.3, 4.0]);
        let err = grad_check(
            |p| {
                let l = p[0].data().iter().zip(&c).map(|(a, b)| a * b).sum();
                (l, vec![Tensor::from_vec(c.to_vec())])
            },
            &[theta],
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let theta = Tensor::from_vec(vec![1.0]);
        let r = grad_check(|_| (f64::NAN, vec![Tensor::from_vec(vec![0.0])]), &[theta], 1e-5);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
