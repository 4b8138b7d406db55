use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentContext};
use crate::error::{invalid, Error, Result};
use crate::model::{beam_search, greedy_continue, max_decode_len, Hypothesis, IncrementalModel, Vocabulary, EOS};

/// How continuations are generated after each READ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Search {
    Greedy,
    Beam { width: usize, length_norm: bool },
}

impl Search {
    /// Greedy for width 1, raw-score beam search otherwise.
    pub fn with_width(width: usize) -> Self {
        if width <= 1 {
            Self::Greedy
        } else {
            Self::Beam {
                width,
                length_norm: false,
            }
        }
    }

    fn run<M: IncrementalModel>(
        self,
        model: &M,
        state: &M::Dec,
        enc: &M::Enc,
        max_len: usize,
    ) -> Result<Vec<Hypothesis<M::Dec>>> {
        match self {
            Self::Greedy => Ok(vec![greedy_continue(model, state, enc, max_len)?]),
            Self::Beam { width, length_norm } => beam_search(model, state, enc, width, max_len, length_norm),
        }
    }
}

/// Source tokens read when each committed target word was written.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitTrace(pub Vec<usize>);

impl CommitTrace {
    pub fn entries(&self) -> &[usize] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Read,
    Write,
}

/// One line of the streaming trace log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub source_consumed: usize,
    pub committed: usize,
    /// Tokens committed by this event; empty for READs.
    pub tokens: Vec<u32>,
}

/// Renders events as `KIND<TAB>consumed<TAB>committed<TAB>tokens` lines.
pub fn render_events(events: &[TraceEvent], vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for e in events {
        let kind = match e.kind {
            EventKind::Read => "READ",
            EventKind::Write => "WRITE",
        };
        let _ = writeln!(
            out,
            "{kind}\t{}\t{}\t{}",
            e.source_consumed,
            e.committed,
            vocab.decode(&e.tokens).join(" ")
        );
    }
    out
}

/// The words of `t` right after the committed prefix `t_c`: at most `n_w`,
/// never reaching `</s>`.
pub fn get_new_tokens<'a>(t_c: &[u32], t: &'a [u32], n_w: usize) -> Result<&'a [u32]> {
    if t.len() < t_c.len() || &t[..t_c.len()] != t_c {
        return Err(Error::Logic(
            "committed sequence is not a prefix of the current one".into(),
        ));
    }
    let rest = &t[t_c.len()..];
    let words = rest.iter().position(|&x| x == EOS).unwrap_or(rest.len());
    Ok(&rest[..n_w.min(words)])
}

/// Picks the hypothesis to commit `k` words from: the best cumulative
/// log-probability over the first `k` tokens among hypotheses that have `k`
/// words before `</s>`. Earlier (better ranked) hypotheses win ties.
pub fn select_for_commit<D: Clone>(hyps: &[Hypothesis<D>], k: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, h) in hyps.iter().enumerate() {
        if h.words() < k {
            continue;
        }
        let s = h.prefix_score(k);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// State of one incremental decoding pass over a single sentence.
pub struct StreamSession<'m, M: IncrementalModel> {
    model: &'m M,
    search: Search,
    source: Vec<u32>,
    committed: Vec<u32>,
    enc: M::Enc,
    saved_dec: M::Dec,
    /// Current hypotheses beyond the commit point, best first.
    hyps: Vec<Hypothesis<M::Dec>>,
    cur_probs: Vec<f32>,
    prev: Option<(Vec<u32>, Vec<f32>)>,
    trace: CommitTrace,
    events: Vec<TraceEvent>,
    finished: bool,
}

impl<'m, M: IncrementalModel> StreamSession<'m, M> {
    pub fn new(model: &'m M, search: Search) -> Self {
        Self {
            model,
            search,
            source: Vec::new(),
            committed: Vec::new(),
            enc: model.new_encoder(),
            saved_dec: model.initial_decoder(),
            hyps: vec![Hypothesis::empty()],
            cur_probs: Vec::new(),
            prev: None,
            trace: CommitTrace::default(),
            events: Vec::new(),
            finished: false,
        }
    }

    /// READ: consume one source token and regenerate the continuation.
    pub fn read(&mut self, token: u32) -> Result<()> {
        if self.finished {
            return Err(Error::State("read after the session finished".into()));
        }
        self.model.extend(&mut self.enc, token)?;
        if !self.source.is_empty() {
            let cont = &self.hyps[0];
            self.prev = Some((cont.tokens.clone(), std::mem::take(&mut self.cur_probs)));
        }
        self.source.push(token);
        debug_assert_eq!(self.model.encoder_len(&self.enc), self.source.len());
        let cap = max_decode_len(self.source.len()).saturating_sub(self.committed.len());
        self.hyps = if cap == 0 {
            vec![Hypothesis::empty()]
        } else {
            self.search.run(self.model, &self.saved_dec, &self.enc, cap)?
        };
        self.cur_probs = self.hyps[0].probs();
        self.events.push(TraceEvent {
            kind: EventKind::Read,
            source_consumed: self.source.len(),
            committed: self.committed.len(),
            tokens: Vec::new(),
        });
        Ok(())
    }

    /// WRITE: commit up to `n_w` words of the current continuation.
    pub fn write(&mut self, n_w: usize) -> Result<Vec<u32>> {
        if self.finished {
            return Err(Error::State("write after the session finished".into()));
        }
        let k = get_new_tokens(&self.committed, &self.current(), n_w)?.len();
        let idx = if k > 0 {
            select_for_commit(&self.hyps, k).ok_or_else(|| Error::Logic("no hypothesis covers the commit".into()))?
        } else {
            0
        };
        Ok(self.commit(idx, k))
    }

    /// End of source: commit every remaining word of the best continuation
    /// and close the session. No re-ranking, so wait-until-end reproduces
    /// offline decoding exactly.
    pub fn finish(&mut self) -> Result<Vec<u32>> {
        if self.finished {
            return Err(Error::State("finish after the session finished".into()));
        }
        if self.source.is_empty() {
            return Err(invalid("cannot finish a session that read nothing"));
        }
        let new = self.commit(0, self.hyps[0].words());
        self.finished = true;
        Ok(new)
    }

    /// Commits the first `k` words of hypothesis `idx`, keeps only its
    /// remainder and logs a WRITE event.
    fn commit(&mut self, idx: usize, k: usize) -> Vec<u32> {
        let mut new = Vec::new();
        if k > 0 {
            let chosen = &self.hyps[idx];
            new.extend_from_slice(&chosen.tokens[..k]);
            self.saved_dec = chosen.states[k - 1].clone();
            let rest = chosen.rebase(k);
            self.committed.extend_from_slice(&new);
            self.trace.0.extend(std::iter::repeat_n(self.source.len(), k));
            self.cur_probs = rest.probs();
            self.hyps = vec![rest];
        }
        self.events.push(TraceEvent {
            kind: EventKind::Write,
            source_consumed: self.source.len(),
            committed: self.committed.len(),
            tokens: new.clone(),
        });
        new
    }

    /// What an agent sees after the latest READ.
    pub fn context(&self, source_finished: bool) -> AgentContext<'_> {
        AgentContext {
            committed_len: self.committed.len(),
            current: &self.hyps[0].tokens,
            current_probs: &self.cur_probs,
            previous: self.prev.as_ref().map(|(t, p)| (t.as_slice(), p.as_slice())),
            source_read: self.source.len(),
            source_finished,
        }
    }

    pub fn committed(&self) -> &[u32] {
        &self.committed
    }

    /// Committed words followed by the current best continuation.
    pub fn current(&self) -> Vec<u32> {
        let mut t = self.committed.clone();
        t.extend_from_slice(&self.hyps[0].tokens);
        t
    }

    pub fn hypotheses(&self) -> &[Hypothesis<M::Dec>] {
        &self.hyps
    }

    pub fn source(&self) -> &[u32] {
        &self.source
    }

    pub fn trace(&self) -> &CommitTrace {
        &self.trace
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamOutput {
    /// Committed words, without `</s>`.
    pub translation: Vec<u32>,
    pub trace: CommitTrace,
    pub events: Vec<TraceEvent>,
}

/// Runs a whole sentence: READ every token, consult the agent after every
/// READ except the last, and commit everything once the source is complete.
pub fn run_stream<M: IncrementalModel>(
    model: &M,
    agent: &mut Agent,
    source: &[u32],
    search: Search,
) -> Result<StreamOutput> {
    if source.is_empty() {
        return Err(invalid("empty source sentence"));
    }
    agent.reset();
    let mut session = StreamSession::new(model, search);
    for (i, &tok) in source.iter().enumerate() {
        session.read(tok)?;
        if i + 1 < source.len() {
            let n_w = agent.decide(&session.context(false));
            session.write(n_w)?;
        } else {
            session.finish()?;
        }
    }
    Ok(StreamOutput {
        translation: session.committed,
        trace: session.trace,
        events: session.events,
    })
}

/// Full-sentence decoding from the zero decoder state; the reference that
/// wait-until-end streaming must reproduce.
pub fn decode_offline<M: IncrementalModel>(model: &M, source: &[u32], search: Search) -> Result<Vec<u32>> {
    if source.is_empty() {
        return Ok(Vec::new());
    }
    let enc = model.encode_full(source)?;
    let hyps = search.run(model, &model.initial_decoder(), &enc, max_decode_len(source.len()))?;
    let best = &hyps[0];
    Ok(best.tokens[..best.words()].to_vec())
}
