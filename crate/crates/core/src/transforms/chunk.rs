use std::ops::Range;

use super::{check_bounds, check_parallel, Alignment};
use crate::error::{invalid, Result};

/// A source chunk with the target span projected onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkPair<S> {
    pub sentence: usize,
    pub src_span: Range<usize>,
    pub tgt_span: Range<usize>,
    pub src: Vec<S>,
    pub tgt: Vec<S>,
}

/// Cuts one sentence pair into `n`-token source chunks.
///
/// Chunks are visited left to right. A chunk's target span starts where the
/// previous one ended and runs through the largest target index aligned into
/// the chunk; the last chunk always extends to the end of the target.
/// Chunks whose span would be empty are dropped.
pub fn chunk_sentence<S: Clone>(
    src: &[S],
    tgt: &[S],
    align: &Alignment,
    n: usize,
    sentence: usize,
) -> Result<Vec<ChunkPair<S>>> {
    if n == 0 {
        return Err(invalid("chunk size must be at least 1"));
    }
    check_bounds(align, src.len(), tgt.len(), sentence + 1)?;
    let mut out = Vec::new();
    let mut prev_end = 0usize;
    let mut start = 0usize;
    while start < src.len() {
        let stop = (start + n).min(src.len());
        let mut end = align
            .points()
            .iter()
            .filter(|(s, _)| (start..stop).contains(s))
            .map(|&(_, t)| t + 1)
            .max()
            .unwrap_or(0)
            .max(prev_end);
        if stop == src.len() {
            end = tgt.len();
        }
        if end > prev_end {
            out.push(ChunkPair {
                sentence,
                src_span: start..stop,
                tgt_span: prev_end..end,
                src: src[start..stop].to_vec(),
                tgt: tgt[prev_end..end].to_vec(),
            });
            prev_end = end;
        }
        start = stop;
    }
    Ok(out)
}

/// [`chunk_sentence`] over a parallel corpus, in order.
pub fn chunk_corpus<S: Clone>(
    src: &[Vec<S>],
    tgt: &[Vec<S>],
    align: &[Alignment],
    n: usize,
) -> Result<Vec<ChunkPair<S>>> {
    check_parallel(src, tgt, align)?;
    let mut out = Vec::new();
    for (i, ((s, t), a)) in src.iter().zip(tgt).zip(align).enumerate() {
        out.extend(chunk_sentence(s, t, a, n, i)?);
    }
    Ok(out)
}
