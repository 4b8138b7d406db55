//! READ/WRITE incremental decoding.
//!
//! A [`StreamSession`] consumes source tokens one at a time. Each READ
//! extends the encoder and regenerates the continuation from the decoder
//! state saved at the last committed word; each WRITE makes some prefix of
//! that continuation final. With beam search, a WRITE of `k` words re-ranks
//! the beam at position `k`, keeps the winner and discards the rest.

mod chunk;
mod session;

pub use chunk::chunk_decode;
pub use session::{
    decode_offline, get_new_tokens, render_events, run_stream, select_for_commit, CommitTrace, EventKind, Search,
    StreamOutput, StreamSession, TraceEvent,
};

use crate::agents::{Agent, Policy};
use crate::error::Result;
use crate::model::IncrementalModel;

/// Decodes one sentence with a streaming agent or the chunk baseline. An
/// empty source yields an empty translation.
pub fn run_policy<M: IncrementalModel>(
    model: &M,
    policy: Policy,
    source: &[u32],
    search: Search,
) -> Result<StreamOutput> {
    if source.is_empty() {
        return Ok(StreamOutput {
            translation: Vec::new(),
            trace: CommitTrace::default(),
            events: Vec::new(),
        });
    }
    match policy {
        Policy::Agent(kind) => run_stream(model, &mut Agent::new(kind), source, search),
        Policy::Chunk(n) => chunk_decode(model, source, n, search),
    }
}
