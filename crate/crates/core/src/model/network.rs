use rand::Rng;

use super::params::{Seq2SeqParams, LAYERS};
use super::vocab::{BOS, EOS};
use crate::error::{invalid, Result};
use crate::numerics::{
    attention, attention_backward, axpy, log_softmax, lstm_cell_backward, lstm_cell_forward, lstm_cell_forward_cached,
    softmax_cross_entropy, LstmCache, Scalar,
};

type LayerState<T> = (Vec<T>, Vec<T>);

fn zero_layers<T: Scalar>(hidden: usize) -> Vec<LayerState<T>> {
    (0..LAYERS)
        .map(|_| (vec![T::zero(); hidden], vec![T::zero(); hidden]))
        .collect()
}

/// Encoder state for a growing source prefix.
///
/// `states` holds one top-layer hidden vector per consumed source token and
/// only ever grows.
#[derive(Clone, Debug, PartialEq)]
pub struct EncState<T = f32> {
    layers: Vec<LayerState<T>>,
    states: Vec<Vec<T>>,
}

impl<T: Scalar> EncState<T> {
    pub fn new(params: &Seq2SeqParams<T>) -> Self {
        Self {
            layers: zero_layers(params.hidden_size()),
            states: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }
}

/// Decoder recurrent state plus the token to be fed at the next step.
#[derive(Clone, Debug, PartialEq)]
pub struct DecState<T = f32> {
    pub layers: Vec<LayerState<T>>,
    pub last_token: u32,
}

impl<T: Scalar> DecState<T> {
    /// All-zero recurrent state with `<s>` as the pending input.
    pub fn initial(params: &Seq2SeqParams<T>) -> Self {
        Self {
            layers: zero_layers(params.hidden_size()),
            last_token: BOS,
        }
    }

    /// The same recurrent state with `token` as the next input.
    pub fn with_token(mut self, token: u32) -> Self {
        self.last_token = token;
        self
    }
}

fn check_src(params: &Seq2SeqParams<impl Scalar>, token: u32) -> Result<()> {
    if (token as usize) < params.src_vocab_size() {
        Ok(())
    } else {
        Err(invalid(format!(
            "source id {token} outside vocabulary of {}",
            params.src_vocab_size()
        )))
    }
}

/// Consumes one more source token, appending one top-layer vector.
pub fn encode_extend<T: Scalar>(params: &Seq2SeqParams<T>, state: &mut EncState<T>, token: u32) -> Result<()> {
    check_src(params, token)?;
    let mut x = params.src_embed.row(token as usize).to_vec();
    for (cell, (h, c)) in params.encoder.iter().zip(state.layers.iter_mut()) {
        let (h_new, c_new) = lstm_cell_forward(&x, h, c, cell)?;
        *h = h_new;
        *c = c_new;
        x = h.clone();
    }
    state.states.push(x);
    Ok(())
}

/// Encodes a complete source sentence in one pass, layer by layer.
pub fn encode_offline<T: Scalar>(params: &Seq2SeqParams<T>, tokens: &[u32]) -> Result<EncState<T>> {
    for &t in tokens {
        check_src(params, t)?;
    }
    let hidden = params.hidden_size();
    let mut inputs: Vec<Vec<T>> = tokens
        .iter()
        .map(|&t| params.src_embed.row(t as usize).to_vec())
        .collect();
    let mut finals = Vec::with_capacity(LAYERS);
    for cell in &params.encoder {
        let mut h = vec![T::zero(); hidden];
        let mut c = vec![T::zero(); hidden];
        let mut outputs = Vec::with_capacity(inputs.len());
        for x in &inputs {
            let (h_new, c_new) = lstm_cell_forward(x, &h, &c, cell)?;
            h = h_new;
            c = c_new;
            outputs.push(h.clone());
        }
        finals.push((h, c));
        inputs = outputs;
    }
    Ok(EncState {
        layers: finals,
        states: inputs,
    })
}

fn decoder_layers<T: Scalar>(params: &Seq2SeqParams<T>, state: &DecState<T>) -> Result<Vec<LayerState<T>>> {
    let tok = state.last_token as usize;
    if tok >= params.tgt_vocab_size() {
        return Err(invalid(format!(
            "target id {tok} outside vocabulary of {}",
            params.tgt_vocab_size()
        )));
    }
    let mut x = params.tgt_embed.row(tok).to_vec();
    let mut out = Vec::with_capacity(LAYERS);
    for (cell, (h, c)) in params.decoder.iter().zip(&state.layers) {
        let (h_new, c_new) = lstm_cell_forward(&x, h, c, cell)?;
        x = h_new.clone();
        out.push((h_new, c_new));
    }
    Ok(out)
}

fn output_logits<T: Scalar>(params: &Seq2SeqParams<T>, top: &[T], enc_states: &[Vec<T>]) -> Result<Vec<T>> {
    let att = attention(top, enc_states)?;
    let mut concat = att.context;
    concat.extend_from_slice(top);
    let mut attn_out = params.attn_proj.matvec(&concat);
    attn_out.iter_mut().for_each(|v| *v = v.tanh());
    Ok(params.out_proj.matvec(&attn_out))
}

/// One decoder step over the encoder vectors currently stored in `enc`.
///
/// Returns normalized log-probabilities over the target vocabulary and the
/// advanced recurrent state. The returned state still carries the consumed
/// token; set the chosen output with [`DecState::with_token`].
pub fn decode_step<T: Scalar>(
    params: &Seq2SeqParams<T>,
    state: &DecState<T>,
    enc: &EncState<T>,
) -> Result<(Vec<T>, DecState<T>)> {
    if enc.is_empty() {
        return Err(invalid("decoder step needs at least one encoder state"));
    }
    let layers = decoder_layers(params, state)?;
    let logits = output_logits(params, &layers[LAYERS - 1].0, enc.states())?;
    Ok((
        log_softmax(&logits),
        DecState {
            layers,
            last_token: state.last_token,
        },
    ))
}

/// Inverted dropout on the connections between stacked layers.
pub struct Dropout<'r, R: Rng> {
    pub rate: f64,
    pub rng: &'r mut R,
}

fn dropout_mask<T: Scalar, R: Rng>(n: usize, dropout: &mut Option<Dropout<'_, R>>) -> Option<Vec<T>> {
    let d = dropout.as_mut()?;
    if d.rate <= 0.0 {
        return None;
    }
    let keep = T::of(1.0 / (1.0 - d.rate));
    Some(
        (0..n)
            .map(|_| if d.rng.gen::<f64>() < d.rate { T::zero() } else { keep })
            .collect(),
    )
}

fn apply_mask<T: Scalar>(v: &mut [T], mask: &Option<Vec<T>>) {
    if let Some(m) = mask {
        v.iter_mut().zip(m).for_each(|(x, &k)| *x *= k);
    }
}

struct StepCache<T> {
    cells: Vec<LstmCache<T>>,
    masks: Vec<Option<Vec<T>>>,
}

struct DecoderCache<T> {
    step: StepCache<T>,
    top: Vec<T>,
    weights: Vec<T>,
    concat: Vec<T>,
    attn_out: Vec<T>,
    d_logits: Vec<T>,
}

fn stack_forward<T: Scalar, R: Rng>(
    cells: &[crate::numerics::LstmCellParams<T>],
    input: &[T],
    layers: &mut [LayerState<T>],
    dropout: &mut Option<Dropout<'_, R>>,
) -> Result<(Vec<T>, StepCache<T>)> {
    let mut x = input.to_vec();
    let mut caches = Vec::with_capacity(LAYERS);
    let mut masks = Vec::with_capacity(LAYERS);
    for (l, (cell, (h, c))) in cells.iter().zip(layers.iter_mut()).enumerate() {
        if l > 0 {
            let mask = dropout_mask(x.len(), dropout);
            apply_mask(&mut x, &mask);
            masks.push(mask);
        } else {
            masks.push(None);
        }
        let (h_new, c_new, cache) = lstm_cell_forward_cached(&x, h, c, cell)?;
        *h = h_new;
        *c = c_new;
        caches.push(cache);
        x = h.clone();
    }
    Ok((x, StepCache { cells: caches, masks }))
}

/// Backpropagates one time step through the layer stack. `d_top` is the
/// gradient reaching the top hidden output from outside the recurrence;
/// `d_next` carries `(dh, dc)` from the following time step and is updated
/// in place. Returns the gradient with respect to the bottom input.
fn stack_backward<T: Scalar>(
    cells: &[crate::numerics::LstmCellParams<T>],
    grads: &mut [crate::numerics::LstmCellParams<T>],
    cache: &StepCache<T>,
    mut d_top: Vec<T>,
    d_next: &mut [LayerState<T>],
) -> Vec<T> {
    for l in (0..LAYERS).rev() {
        axpy(T::one(), &d_next[l].0, &mut d_top);
        let (mut dx, dh_prev, dc_prev) =
            lstm_cell_backward(&cells[l], &cache.cells[l], &d_top, &d_next[l].1, &mut grads[l]);
        apply_mask(&mut dx, &cache.masks[l]);
        d_next[l] = (dh_prev, dc_prev);
        d_top = dx;
    }
    d_top
}

/// Teacher-forced cross-entropy of one sentence pair, summed over target
/// positions (including `</s>`). Gradients are accumulated into `grads`.
pub fn loss_and_grad<T: Scalar, R: Rng>(
    params: &Seq2SeqParams<T>,
    src: &[u32],
    tgt: &[u32],
    mut dropout: Option<Dropout<'_, R>>,
    grads: &mut Seq2SeqParams<T>,
) -> Result<T> {
    if src.is_empty() {
        return Err(invalid("training pair with an empty source"));
    }
    for &t in src {
        check_src(params, t)?;
    }
    if let Some(&bad) = tgt.iter().find(|&&t| t as usize >= params.tgt_vocab_size()) {
        return Err(invalid(format!("target id {bad} outside vocabulary")));
    }
    let hidden = params.hidden_size();

    let mut layers = zero_layers::<T>(hidden);
    let mut enc_caches = Vec::with_capacity(src.len());
    let mut enc_states = Vec::with_capacity(src.len());
    for &x in src {
        let emb = params.src_embed.row(x as usize);
        let (top, cache) = stack_forward(&params.encoder, emb, &mut layers, &mut dropout)?;
        enc_caches.push(cache);
        enc_states.push(top);
    }

    let inputs: Vec<u32> = std::iter::once(BOS).chain(tgt.iter().copied()).collect();
    let outputs: Vec<u32> = tgt.iter().copied().chain(std::iter::once(EOS)).collect();
    let mut layers = zero_layers::<T>(hidden);
    let mut dec_caches = Vec::with_capacity(inputs.len());
    let mut loss = T::zero();
    for (&y_in, &y_out) in inputs.iter().zip(&outputs) {
        let emb = params.tgt_embed.row(y_in as usize);
        let (top, step) = stack_forward(&params.decoder, emb, &mut layers, &mut dropout)?;
        let att = attention(&top, &enc_states)?;
        let mut concat = att.context;
        concat.extend_from_slice(&top);
        let mut attn_out = params.attn_proj.matvec(&concat);
        attn_out.iter_mut().for_each(|v| *v = v.tanh());
        let logits = params.out_proj.matvec(&attn_out);
        let (l, d_logits) = softmax_cross_entropy(&logits, y_out as usize)?;
        loss += l;
        dec_caches.push(DecoderCache {
            step,
            top,
            weights: att.weights,
            concat,
            attn_out,
            d_logits,
        });
    }

    let mut d_enc: Vec<Vec<T>> = vec![vec![T::zero(); hidden]; src.len()];
    let mut d_next = zero_layers::<T>(hidden);
    for (u, cache) in dec_caches.iter().enumerate().rev() {
        grads.out_proj.add_outer(&cache.d_logits, &cache.attn_out);
        let mut d_attn = vec![T::zero(); hidden];
        params.out_proj.matvec_t_acc(&cache.d_logits, &mut d_attn);
        for (d, &a) in d_attn.iter_mut().zip(&cache.attn_out) {
            *d *= T::one() - a * a;
        }
        grads.attn_proj.add_outer(&d_attn, &cache.concat);
        let mut d_concat = vec![T::zero(); 2 * hidden];
        params.attn_proj.matvec_t_acc(&d_attn, &mut d_concat);
        let (d_ctx, d_top_direct) = d_concat.split_at(hidden);
        let mut d_top = attention_backward(&cache.top, &enc_states, &cache.weights, d_ctx, &mut d_enc);
        axpy(T::one(), d_top_direct, &mut d_top);
        let d_emb = stack_backward(&params.decoder, &mut grads.decoder, &cache.step, d_top, &mut d_next);
        axpy(T::one(), &d_emb, grads.tgt_embed.row_mut(inputs[u] as usize));
    }

    let mut d_next = zero_layers::<T>(hidden);
    for (t, cache) in enc_caches.iter().enumerate().rev() {
        let d_top = std::mem::take(&mut d_enc[t]);
        let d_emb = stack_backward(&params.encoder, &mut grads.encoder, cache, d_top, &mut d_next);
        axpy(T::one(), &d_emb, grads.src_embed.row_mut(src[t] as usize));
    }
    Ok(loss)
}
