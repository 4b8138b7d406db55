use std::cmp::Ordering;

use super::network::{decode_step, encode_extend, encode_offline, DecState, EncState};
use super::params::Seq2SeqParams;
use super::vocab::EOS;
use crate::error::{invalid, Result};

/// The operations incremental decoding needs from a translation model.
///
/// Implemented by [`Seq2SeqParams`]; tests substitute scripted models.
pub trait IncrementalModel {
    type Enc: Clone;
    type Dec: Clone;

    fn new_encoder(&self) -> Self::Enc;
    fn encoder_len(&self, enc: &Self::Enc) -> usize;
    fn extend(&self, enc: &mut Self::Enc, token: u32) -> Result<()>;
    fn encode_full(&self, tokens: &[u32]) -> Result<Self::Enc>;
    fn initial_decoder(&self) -> Self::Dec;
    /// Log-probabilities of the next token and the advanced state.
    fn step(&self, dec: &Self::Dec, enc: &Self::Enc) -> Result<(Vec<f32>, Self::Dec)>;
    /// Records `token` as emitted so the next step consumes it.
    fn feed(&self, dec: Self::Dec, token: u32) -> Self::Dec;
}

impl IncrementalModel for Seq2SeqParams<f32> {
    type Enc = EncState<f32>;
    type Dec = DecState<f32>;

    fn new_encoder(&self) -> Self::Enc {
        EncState::new(self)
    }
    fn encoder_len(&self, enc: &Self::Enc) -> usize {
        enc.len()
    }
    fn extend(&self, enc: &mut Self::Enc, token: u32) -> Result<()> {
        encode_extend(self, enc, token)
    }
    fn encode_full(&self, tokens: &[u32]) -> Result<Self::Enc> {
        encode_offline(self, tokens)
    }
    fn initial_decoder(&self) -> Self::Dec {
        DecState::initial(self)
    }
    fn step(&self, dec: &Self::Dec, enc: &Self::Enc) -> Result<(Vec<f32>, Self::Dec)> {
        decode_step(self, dec, enc)
    }
    fn feed(&self, dec: Self::Dec, token: u32) -> Self::Dec {
        dec.with_token(token)
    }
}

/// A decoded continuation: tokens, their log-probabilities, and the decoder
/// state after each token (ready to continue from that point).
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis<D> {
    pub tokens: Vec<u32>,
    pub logprobs: Vec<f32>,
    pub states: Vec<D>,
    /// Sum of `logprobs`, accumulated in order in `f64`.
    pub score: f64,
}

impl<D: Clone> Hypothesis<D> {
    pub fn empty() -> Self {
        Self {
            tokens: Vec::new(),
            logprobs: Vec::new(),
            states: Vec::new(),
            score: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn probs(&self) -> Vec<f32> {
        self.logprobs.iter().map(|l| l.exp()).collect()
    }

    pub fn is_finished(&self) -> bool {
        self.tokens.last() == Some(&EOS)
    }

    /// Cumulative log-probability of the first `k` tokens.
    pub fn prefix_score(&self, k: usize) -> f64 {
        self.logprobs[..k].iter().map(|&l| l as f64).sum()
    }

    /// Number of leading tokens before `</s>`.
    pub fn words(&self) -> usize {
        self.tokens.iter().position(|&t| t == EOS).unwrap_or(self.tokens.len())
    }

    fn push(&mut self, token: u32, logprob: f32, state: D) {
        self.tokens.push(token);
        self.logprobs.push(logprob);
        self.states.push(state);
        self.score += logprob as f64;
    }

    /// Drops the first `k` tokens, keeping the rest as a fresh continuation.
    pub fn rebase(&self, k: usize) -> Self {
        let logprobs = self.logprobs[k..].to_vec();
        Self {
            tokens: self.tokens[k..].to_vec(),
            score: logprobs.iter().map(|&l| l as f64).sum(),
            logprobs,
            states: self.states[k..].to_vec(),
        }
    }
}

/// Index of the largest log-probability; ties go to the lowest id.
fn argmax(lp: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in lp.iter().enumerate().skip(1) {
        if v > lp[best] {
            best = i;
        }
    }
    best
}

/// Greedy continuation from `state` until `</s>` (included) or `max_len`.
pub fn greedy_continue<M: IncrementalModel>(
    model: &M,
    state: &M::Dec,
    enc: &M::Enc,
    max_len: usize,
) -> Result<Hypothesis<M::Dec>> {
    if max_len == 0 {
        return Err(invalid("max_len must be at least 1"));
    }
    let mut hyp = Hypothesis::empty();
    let mut cur = state.clone();
    while hyp.len() < max_len {
        let (lp, next) = model.step(&cur, enc)?;
        let tok = argmax(&lp);
        cur = model.feed(next, tok as u32);
        hyp.push(tok as u32, lp[tok], cur.clone());
        if tok as u32 == EOS {
            break;
        }
    }
    Ok(hyp)
}

struct Candidate<D> {
    score: f64,
    logprob: f32,
    parent: usize,
    token: u32,
    state: D,
}

fn rank_score<D: Clone>(h: &Hypothesis<D>, length_norm: bool) -> f64 {
    if length_norm && !h.is_empty() {
        h.score / h.len() as f64
    } else {
        h.score
    }
}

/// Beam search from `state`. Returns every surviving hypothesis (finished
/// ones end in `</s>`), best first by cumulative log-probability, optionally
/// length-normalized.
///
/// Candidates are ordered by score, then by their own step log-probability,
/// then parent rank and token id, so width 1 reproduces [`greedy_continue`].
pub fn beam_search<M: IncrementalModel>(
    model: &M,
    state: &M::Dec,
    enc: &M::Enc,
    width: usize,
    max_len: usize,
    length_norm: bool,
) -> Result<Vec<Hypothesis<M::Dec>>> {
    if width == 0 {
        return Err(invalid("beam width must be at least 1"));
    }
    if max_len == 0 {
        return Err(invalid("max_len must be at least 1"));
    }
    let mut alive: Vec<(Hypothesis<M::Dec>, M::Dec)> = vec![(Hypothesis::empty(), state.clone())];
    let mut finished: Vec<Hypothesis<M::Dec>> = Vec::new();
    for _ in 0..max_len {
        let mut cands: Vec<Candidate<M::Dec>> = Vec::new();
        for (parent, (hyp, cur)) in alive.iter().enumerate() {
            let (lp, next) = model.step(cur, enc)?;
            let mut order: Vec<usize> = (0..lp.len()).collect();
            order.sort_by(|&a, &b| lp[b].total_cmp(&lp[a]).then(a.cmp(&b)));
            for &tok in order.iter().take(width) {
                cands.push(Candidate {
                    score: hyp.score + lp[tok] as f64,
                    logprob: lp[tok],
                    parent,
                    token: tok as u32,
                    state: next.clone(),
                });
            }
        }
        cands.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(b.logprob.total_cmp(&a.logprob))
                .then(a.parent.cmp(&b.parent))
                .then(a.token.cmp(&b.token))
        });
        cands.truncate(width);
        let mut next_alive = Vec::with_capacity(width);
        for c in cands {
            let mut hyp = alive[c.parent].0.clone();
            let st = model.feed(c.state, c.token);
            hyp.push(c.token, c.logprob, st.clone());
            if c.token == EOS {
                finished.push(hyp);
            } else {
                next_alive.push((hyp, st));
            }
        }
        alive = next_alive;
        if alive.is_empty() || finished.len() >= width {
            break;
        }
    }
    let mut pool: Vec<Hypothesis<M::Dec>> = finished;
    pool.extend(alive.into_iter().map(|(h, _)| h));
    pool.sort_by(|a, b| {
        rank_score(b, length_norm)
            .partial_cmp(&rank_score(a, length_norm))
            .unwrap_or(Ordering::Equal)
    });
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64) -> Seq2SeqParams<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Seq2SeqParams::init(9, 9, 4, 6, 0.8, &mut rng)
    }

    #[test]
    fn greedy_respects_cap() {
        let m = model(0);
        let enc = m.encode_full(&[4, 5, 6]).unwrap();
        let h = greedy_continue(&m, &m.initial_decoder(), &enc, 1).unwrap();
        assert!(h.len() <= 1);
        assert!(greedy_continue(&m, &m.initial_decoder(), &enc, 0).is_err());
    }

    #[test]
    fn width_one_beam_equals_greedy() {
        for seed in 0..20 {
            let m = model(seed);
            let enc = m.encode_full(&[4, 5, 6, 7, 8]).unwrap();
            let g = greedy_continue(&m, &m.initial_decoder(), &enc, 15).unwrap();
            let b = beam_search(&m, &m.initial_decoder(), &enc, 1, 15, false).unwrap();
            assert_eq!(b.len(), 1);
            assert_eq!(b[0], g);
        }
    }

    #[test]
    fn beam_scores_are_exact_sums() {
        let m = model(7);
        let enc = m.encode_full(&[4, 5, 6]).unwrap();
        for h in beam_search(&m, &m.initial_decoder(), &enc, 4, 10, false).unwrap() {
            let s: f64 = h.logprobs.iter().map(|&l| l as f64).sum();
            assert_eq!(s, h.score);
        }
    }
}
