use super::{axpy, dot, softmax_in_place, Scalar};
use crate::error::{invalid, Result};

/// Output of dot-product attention.
#[derive(Clone, Debug, PartialEq)]
pub struct Attended<T> {
    pub context: Vec<T>,
    pub weights: Vec<T>,
}

/// Global dot-product attention of `query` over `enc_states`.
pub fn attention<T: Scalar, V: AsRef<[T]>>(query: &[T], enc_states: &[V]) -> Result<Attended<T>> {
    if enc_states.is_empty() {
        return Err(invalid("attention over an empty encoder state list"));
    }
    let mut weights = Vec::with_capacity(enc_states.len());
    for s in enc_states {
        let s = s.as_ref();
        if s.len() != query.len() {
            return Err(invalid(format!(
                "encoder state has {} dims, query has {}",
                s.len(),
                query.len()
            )));
        }
        weights.push(dot(query, s));
    }
    softmax_in_place(&mut weights);
    let mut context = vec![T::zero(); query.len()];
    for (&w, s) in weights.iter().zip(enc_states) {
        axpy(w, s.as_ref(), &mut context);
    }
    Ok(Attended { context, weights })
}

/// Gradients of [`attention`] given `d_context`.
///
/// Returns `d_query`; per-state gradients are added into `d_states`.
pub fn attention_backward<T: Scalar, V: AsRef<[T]>>(
    query: &[T],
    enc_states: &[V],
    weights: &[T],
    d_context: &[T],
    d_states: &mut [Vec<T>],
) -> Vec<T> {
    let dw: Vec<T> = enc_states.iter().map(|s| dot(d_context, s.as_ref())).collect();
    let mean: T = weights.iter().zip(&dw).map(|(&a, &d)| a * d).sum();
    let mut d_query = vec![T::zero(); query.len()];
    for (j, s) in enc_states.iter().enumerate() {
        let ds = weights[j] * (dw[j] - mean);
        axpy(ds, s.as_ref(), &mut d_query);
        axpy(weights[j], d_context, &mut d_states[j]);
        axpy(ds, query, &mut d_states[j]);
    }
    d_query
}
