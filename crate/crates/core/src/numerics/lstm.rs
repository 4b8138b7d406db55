use rand::Rng;

use super::{Scalar, Tensor};
use crate::error::{invalid, Result};

/// Weights of one LSTM layer. Gate blocks are stacked in the order
/// input, forget, cell candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCellParams<T = f32> {
    /// `[4H, E]`
    pub input_weights: Tensor<T>,
    /// `[4H, H]`
    pub recurrent_weights: Tensor<T>,
    /// `[4H]`
    pub bias: Tensor<T>,
}

/// Gradient accumulator with the same layout as the parameters.
pub type LstmGrads<T> = LstmCellParams<T>;

impl<T: Scalar> LstmCellParams<T> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            input_weights: Tensor::zeros(&[4 * hidden_size, input_size]),
            recurrent_weights: Tensor::zeros(&[4 * hidden_size, hidden_size]),
            bias: Tensor::zeros(&[4 * hidden_size]),
        }
    }

    /// Uniform init in `[-bound, bound]`, forget-gate bias set to `forget_bias`.
    pub fn init<R: Rng + ?Sized>(
        input_size: usize,
        hidden_size: usize,
        bound: f64,
        forget_bias: f64,
        rng: &mut R,
    ) -> Self {
        let mut p = Self {
            input_weights: Tensor::uniform(&[4 * hidden_size, input_size], bound, rng),
            recurrent_weights: Tensor::uniform(&[4 * hidden_size, hidden_size], bound, rng),
            bias: Tensor::uniform(&[4 * hidden_size], bound, rng),
        };
        for v in &mut p.bias.data_mut()[hidden_size..2 * hidden_size] {
            *v = T::of(forget_bias);
        }
        p
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent_weights.cols()
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_size();
        let ok = self.recurrent_weights.shape() == [4 * h, h]
            && self.input_weights.rows() == 4 * h
            && self.input_weights.shape().len() == 2
            && self.bias.shape() == [4 * h];
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "inconsistent LSTM shapes: input {:?}, recurrent {:?}, bias {:?}",
                self.input_weights.shape(),
                self.recurrent_weights.shape(),
                self.bias.shape()
            )))
        }
    }

    pub fn tensors(&self) -> [&Tensor<T>; 3] {
        [&self.input_weights, &self.recurrent_weights, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 3] {
        [&mut self.input_weights, &mut self.recurrent_weights, &mut self.bias]
    }
}

/// Activations saved by the forward pass for backpropagation.
#[derive(Clone, Debug)]
pub struct LstmCache<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub c_prev: Vec<T>,
    /// Activated gates `[i; f; g; o]`.
    pub gates: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn check_dims<T: Scalar>(x: &[T], h: &[T], c: &[T], p: &LstmCellParams<T>) -> Result<()> {
    let hs = p.hidden_size();
    if x.len() != p.input_size() || h.len() != hs || c.len() != hs {
        return Err(invalid(format!(
            "LSTM cell expects x[{}], h[{hs}], c[{hs}]; got x[{}], h[{}], c[{}]",
            p.input_size(),
            x.len(),
            h.len(),
            c.len()
        )));
    }
    Ok(())
}

fn gates_and_state<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    p: &LstmCellParams<T>,
) -> (Vec<T>, Vec<T>, Vec<T>, Vec<T>) {
    let hs = p.hidden_size();
    let mut z = p.input_weights.matvec(x);
    let zr = p.recurrent_weights.matvec(h_prev);
    for ((zi, &ri), &bi) in z.iter_mut().zip(&zr).zip(p.bias.data()) {
        *zi += ri + bi;
    }
    for (k, zi) in z.iter_mut().enumerate() {
        *zi = if (2 * hs..3 * hs).contains(&k) {
            zi.tanh()
        } else {
            sigmoid(*zi)
        };
    }
    let mut c = vec![T::zero(); hs];
    let mut tanh_c = vec![T::zero(); hs];
    let mut h = vec![T::zero(); hs];
    for j in 0..hs {
        let (i, f, g, o) = (z[j], z[hs + j], z[2 * hs + j], z[3 * hs + j]);
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
    (z, c, tanh_c, h)
}

/// One LSTM step: returns the new `(h, c)`.
pub fn lstm_cell_forward<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    p: &LstmCellParams<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    check_dims(x, h_prev, c_prev, p)?;
    let (_, c, _, h) = gates_and_state(x, h_prev, c_prev, p);
    Ok((h, c))
}

/// Like [`lstm_cell_forward`] but keeps what backpropagation needs.
pub fn lstm_cell_forward_cached<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    p: &LstmCellParams<T>,
) -> Result<(Vec<T>, Vec<T>, LstmCache<T>)> {
    check_dims(x, h_prev, c_prev, p)?;
    let (gates, c, tanh_c, h) = gates_and_state(x, h_prev, c_prev, p);
    let cache = LstmCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates,
        c: c.clone(),
        tanh_c,
    };
    Ok((h, c, cache))
}

/// Backpropagates `dh`, `dc` through one cell step.
///
/// Parameter gradients are accumulated into `grads`; returns
/// `(dx, dh_prev, dc_prev)`.
pub fn lstm_cell_backward<T: Scalar>(
    p: &LstmCellParams<T>,
    cache: &LstmCache<T>,
    dh: &[T],
    dc: &[T],
    grads: &mut LstmGrads<T>,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let hs = p.hidden_size();
    let one = T::one();
    let g = &cache.gates;
    let mut dz = vec![T::zero(); 4 * hs];
    let mut dc_prev = vec![T::zero(); hs];
    for j in 0..hs {
        let (i, f, gg, o) = (g[j], g[hs + j], g[2 * hs + j], g[3 * hs + j]);
        let tc = cache.tanh_c[j];
        let dct = dc[j] + dh[j] * o * (one - tc * tc);
        dz[j] = dct * gg * i * (one - i);
        dz[hs + j] = dct * cache.c_prev[j] * f * (one - f);
        dz[2 * hs + j] = dct * i * (one - gg * gg);
        dz[3 * hs + j] = dh[j] * tc * o * (one - o);
        dc_prev[j] = dct * f;
    }
    grads.input_weights.add_outer(&dz, &cache.x);
    grads.recurrent_weights.add_outer(&dz, &cache.h_prev);
    super::axpy(one, &dz, grads.bias.data_mut());
    let mut dx = vec![T::zero(); p.input_size()];
    p.input_weights.matvec_t_acc(&dz, &mut dx);
    let mut dh_prev = vec![T::zero(); hs];
    p.recurrent_weights.matvec_t_acc(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Scalar-loop LSTM written straight from the cell equations.
    fn reference_cell(x: &[f64], h: &[f64], c: &[f64], p: &LstmCellParams<f64>) -> (Vec<f64>, Vec<f64>) {
        let hs = h.len();
        let e = x.len();
        let wi = p.input_weights.data();
        let wh = p.recurrent_weights.data();
        let b = p.bias.data();
        let pre = |row: usize| {
            let mut s = b[row];
            for k in 0..e {
                s += wi[row * e + k] * x[k];
            }
            for k in 0..hs {
                s += wh[row * hs + k] * h[k];
            }
            s
        };
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h_new = vec![0.0; hs];
        let mut c_new = vec![0.0; hs];
        for j in 0..hs {
            let i = sig(pre(j));
            let f = sig(pre(hs + j));
            let g = pre(2 * hs + j).tanh();
            let o = sig(pre(3 * hs + j));
            c_new[j] = f * c[j] + i * g;
            h_new[j] = o * c_new[j].tanh();
        }
        (h_new, c_new)
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_everything_gives_zero_state() {
        let p = LstmCellParams::<f32>::zeros(3, 4);
        let (h, c) = lstm_cell_forward(&[0.0; 3], &[0.0; 4], &[0.0; 4], &p).unwrap();
        assert!(h.iter().chain(&c).all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_and_closed_input_keep_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = LstmCellParams::<f64>::init(2, 3, 0.1, 1.0, &mut rng);
        for v in &mut p.bias.data_mut()[0..3] {
            *v = -1e3;
        }
        for v in &mut p.bias.data_mut()[3..6] {
            *v = 1e3;
        }
        let c_prev = [0.3, -0.7, 1.5];
        let (_, c) = lstm_cell_forward(&[0.2, -0.4], &[0.1, 0.0, -0.2], &c_prev, &p).unwrap();
        for (a, b) in c.iter().zip(&c_prev) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_scalar_reference() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = LstmCellParams::<f64>::init(5, 7, 0.5, 1.0, &mut rng);
            let x = random_vec(5, &mut rng);
            let h = random_vec(7, &mut rng);
            let c = random_vec(7, &mut rng);
            let (h1, c1) = lstm_cell_forward(&x, &h, &c, &p).unwrap();
            let (h2, c2) = reference_cell(&x, &h, &c, &p);
            for (a, b) in h1.iter().zip(&h2).chain(c1.iter().zip(&c2)) {
                assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn forward_is_bitwise_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = LstmCellParams::<f32>::init(4, 4, 0.1, 1.0, &mut rng);
        let x = [0.5f32, -0.25, 0.125, 1.0];
        let a = lstm_cell_forward(&x, &[0.1; 4], &[0.2; 4], &p).unwrap();
        let b = lstm_cell_forward(&x, &[0.1; 4], &[0.2; 4], &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = LstmCellParams::<f32>::zeros(3, 4);
        assert!(lstm_cell_forward(&[0.0; 2], &[0.0; 4], &[0.0; 4], &p).is_err());
        assert!(lstm_cell_forward(&[0.0; 3], &[0.0; 3], &[0.0; 4], &p).is_err());
    }
}
