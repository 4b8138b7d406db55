use rand::Rng;

use crate::error::{invalid, Result};
use crate::numerics::{LstmCellParams, Scalar, Tensor};

/// Number of stacked LSTM layers on each side.
pub const LAYERS: usize = 2;

/// All trainable tensors of the encoder-decoder.
///
/// The encoder has no right-to-left direction; every parameter here is usable
/// while the source is still arriving.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq2SeqParams<T = f32> {
    /// `[V_src, E]`
    pub src_embed: Tensor<T>,
    /// `[V_tgt, E]`
    pub tgt_embed: Tensor<T>,
    pub encoder: Vec<LstmCellParams<T>>,
    pub decoder: Vec<LstmCellParams<T>>,
    /// `[H, 2H]`, applied to `[context; hidden]`.
    pub attn_proj: Tensor<T>,
    /// `[V_tgt, H]`
    pub out_proj: Tensor<T>,
}

impl<T: Scalar> Seq2SeqParams<T> {
    /// Uniform init in `[-init_range, init_range]` with forget-gate bias 1.
    pub fn init<R: Rng + ?Sized>(
        src_vocab: usize,
        tgt_vocab: usize,
        embed: usize,
        hidden: usize,
        init_range: f64,
        rng: &mut R,
    ) -> Self {
        let layer_in = |l: usize| if l == 0 { embed } else { hidden };
        let src_embed = Tensor::uniform(&[src_vocab, embed], init_range, rng);
        let tgt_embed = Tensor::uniform(&[tgt_vocab, embed], init_range, rng);
        let encoder = (0..LAYERS)
            .map(|l| LstmCellParams::init(layer_in(l), hidden, init_range, 1.0, rng))
            .collect();
        let decoder = (0..LAYERS)
            .map(|l| LstmCellParams::init(layer_in(l), hidden, init_range, 1.0, rng))
            .collect();
        let attn_proj = Tensor::uniform(&[hidden, 2 * hidden], init_range, rng);
        let out_proj = Tensor::uniform(&[tgt_vocab, hidden], init_range, rng);
        Self {
            src_embed,
            tgt_embed,
            encoder,
            decoder,
            attn_proj,
            out_proj,
        }
    }

    pub fn zeros(src_vocab: usize, tgt_vocab: usize, embed: usize, hidden: usize) -> Self {
        let layer_in = |l: usize| if l == 0 { embed } else { hidden };
        Self {
            src_embed: Tensor::zeros(&[src_vocab, embed]),
            tgt_embed: Tensor::zeros(&[tgt_vocab, embed]),
            encoder: (0..LAYERS)
                .map(|l| LstmCellParams::zeros(layer_in(l), hidden))
                .collect(),
            decoder: (0..LAYERS)
                .map(|l| LstmCellParams::zeros(layer_in(l), hidden))
                .collect(),
            attn_proj: Tensor::zeros(&[hidden, 2 * hidden]),
            out_proj: Tensor::zeros(&[tgt_vocab, hidden]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(
            self.src_vocab_size(),
            self.tgt_vocab_size(),
            self.embed_size(),
            self.hidden_size(),
        )
    }

    pub fn hidden_size(&self) -> usize {
        self.attn_proj.rows()
    }

    pub fn embed_size(&self) -> usize {
        self.src_embed.cols()
    }

    pub fn src_vocab_size(&self) -> usize {
        self.src_embed.rows()
    }

    pub fn tgt_vocab_size(&self) -> usize {
        self.tgt_embed.rows()
    }

    /// Canonical tensor order, shared by the optimizer and the checkpoint.
    pub fn tensors(&self) -> Vec<&Tensor<T>> {
        let mut v = vec![&self.src_embed, &self.tgt_embed];
        for cell in self.encoder.iter().chain(&self.decoder) {
            v.extend(cell.tensors());
        }
        v.push(&self.attn_proj);
        v.push(&self.out_proj);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut v = vec![&mut self.src_embed, &mut self.tgt_embed];
        for cell in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            v.extend(cell.tensors_mut());
        }
        v.push(&mut self.attn_proj);
        v.push(&mut self.out_proj);
        v
    }

    /// Names matching [`Self::tensors`] order.
    pub fn tensor_names() -> Vec<String> {
        let mut names = vec!["src_embed".to_string(), "tgt_embed".to_string()];
        for side in ["encoder", "decoder"] {
            for l in 0..LAYERS {
                for part in ["input_weights", "recurrent_weights", "bias"] {
                    names.push(format!("{side}.{l}.{part}"));
                }
            }
        }
        names.push("attn_proj".to_string());
        names.push("out_proj".to_string());
        names
    }

    /// Rebuilds a parameter set from tensors in canonical order.
    pub fn from_tensors(tensors: Vec<Tensor<T>>) -> Result<Self> {
        let expected = 2 + 2 * LAYERS * 3 + 2;
        if tensors.len() != expected {
            return Err(invalid(format!("expected {expected} tensors, got {}", tensors.len())));
        }
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("length checked");
        let src_embed = next();
        let tgt_embed = next();
        let cell = |next: &mut dyn FnMut() -> Tensor<T>| LstmCellParams {
            input_weights: next(),
            recurrent_weights: next(),
            bias: next(),
        };
        let encoder = (0..LAYERS).map(|_| cell(&mut next)).collect();
        let decoder = (0..LAYERS).map(|_| cell(&mut next)).collect();
        let attn_proj = next();
        let out_proj = next();
        let p = Self {
            src_embed,
            tgt_embed,
            encoder,
            decoder,
            attn_proj,
            out_proj,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (e, h) = (self.embed_size(), self.hidden_size());
        let (vs, vt) = (self.src_vocab_size(), self.tgt_vocab_size());
        let want = Self::zeros(vs, vt, e, h);
        for ((name, got), exp) in Self::tensor_names().iter().zip(self.tensors()).zip(want.tensors()) {
            if got.shape() != exp.shape() {
                return Err(invalid(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    got.shape(),
                    exp.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Seq2SeqParams<U> {
        Seq2SeqParams::from_tensors(self.tensors().into_iter().map(|t| t.cast()).collect()).expect("same layout")
    }
}
