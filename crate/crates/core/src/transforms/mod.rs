//! Corpus transforms driven by word alignments: chunked pairs, growing
//! prefix (Add-M) pairs, and synthetic parallel corpora for desk-scale runs.

pub(crate) mod addm;
mod align;
mod chunk;
mod synth;

pub use addm::{addm_corpus, addm_sentence, prefix_lengths, PrefixPair};
pub use align::{parse_pharaoh, parse_pharaoh_file, Alignment};
pub use chunk::{chunk_corpus, chunk_sentence, ChunkPair};
pub use synth::{gen_synthetic, SynthTask, SyntheticCorpus};

use crate::error::{Error, Result};

/// Checks every alignment point against the sentence lengths.
/// `line` is the 1-based sentence number used in error messages.
pub(crate) fn check_bounds(a: &Alignment, src_len: usize, tgt_len: usize, line: usize) -> Result<()> {
    for &(s, t) in a.points() {
        if s >= src_len || t >= tgt_len {
            return Err(Error::Data {
                line,
                message: format!("alignment point {s}-{t} outside sentence pair of lengths {src_len}/{tgt_len}"),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_parallel<S>(src: &[S], tgt: &[S], align: &[Alignment]) -> Result<()> {
    if src.len() != tgt.len() || src.len() != align.len() {
        return Err(Error::InvalidInput(format!(
            "corpora not parallel: {} source, {} target, {} alignment lines",
            src.len(),
            tgt.len(),
            align.len()
        )));
    }
    Ok(())
}
