use super::session::{decode_offline, CommitTrace, EventKind, Search, StreamOutput, TraceEvent};
use crate::error::{invalid, Result};
use crate::model::IncrementalModel;

/// Chunk-based baseline: split the source every `n` tokens and translate
/// each chunk on its own, from a fresh encoder and a zero decoder state.
pub fn chunk_decode<M: IncrementalModel>(model: &M, source: &[u32], n: usize, search: Search) -> Result<StreamOutput> {
    if n == 0 {
        return Err(invalid("chunk size must be at least 1"));
    }
    let mut out = StreamOutput {
        translation: Vec::new(),
        trace: CommitTrace::default(),
        events: Vec::new(),
    };
    let mut consumed = 0;
    for chunk in source.chunks(n) {
        for _ in chunk {
            consumed += 1;
            out.events.push(TraceEvent {
                kind: EventKind::Read,
                source_consumed: consumed,
                committed: out.translation.len(),
                tokens: Vec::new(),
            });
        }
        let words = decode_offline(model, chunk, search)?;
        out.trace.0.extend(std::iter::repeat_n(consumed, words.len()));
        out.translation.extend_from_slice(&words);
        out.events.push(TraceEvent {
            kind: EventKind::Write,
            source_consumed: consumed,
            committed: out.translation.len(),
            tokens: words,
        });
    }
    Ok(out)
}
