use super::{check_bounds, check_parallel, Alignment};
use crate::error::{invalid, Result};

/// A source prefix with its alignment-projected target prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixPair<S> {
    pub sentence: usize,
    pub prefix_len: usize,
    pub src: Vec<S>,
    pub tgt: Vec<S>,
}

/// Length of the target prefix licensed by the first `l` source words.
///
/// The prefix stops before the first target word with an alignment point at
/// or beyond `l`, then drops trailing unaligned words.
fn target_prefix_len(align: &Alignment, tgt_len: usize, l: usize) -> usize {
    let mut last_aligned = 0;
    for t in 0..tgt_len {
        let mut srcs = align.sources_of(t).peekable();
        if srcs.peek().is_none() {
            continue;
        }
        if srcs.any(|s| s >= l) {
            break;
        }
        last_aligned = t + 1;
    }
    last_aligned
}

/// Source prefix lengths `n, n+m, n+2m, ...` below `len`, then `len` itself.
pub fn prefix_lengths(len: usize, n: usize, m: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..).map(|k| n + k * m).take_while(|&l| l < len).collect();
    out.push(len);
    out
}

pub fn addm_sentence<S: Clone>(
    src: &[S],
    tgt: &[S],
    align: &Alignment,
    n: usize,
    m: usize,
    sentence: usize,
) -> Result<Vec<PrefixPair<S>>> {
    if n == 0 || m == 0 {
        return Err(invalid("Add-M needs N >= 1 and M >= 1"));
    }
    check_bounds(align, src.len(), tgt.len(), sentence + 1)?;
    if src.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for l in prefix_lengths(src.len(), n, m) {
        let t = if l == src.len() {
            tgt.len()
        } else {
            target_prefix_len(align, tgt.len(), l)
        };
        if t > 0 {
            out.push(PrefixPair {
                sentence,
                prefix_len: l,
                src: src[..l].to_vec(),
                tgt: tgt[..t].to_vec(),
            });
        }
    }
    Ok(out)
}

/// Growing-prefix training pairs for every sentence, in corpus order.
pub fn addm_corpus<S: Clone>(
    src: &[Vec<S>],
    tgt: &[Vec<S>],
    align: &[Alignment],
    n: usize,
    m: usize,
) -> Result<Vec<PrefixPair<S>>> {
    check_parallel(src, tgt, align)?;
    let mut out = Vec::new();
    for (i, ((s, t), a)) in src.iter().zip(tgt).zip(align).enumerate() {
        out.extend(addm_sentence(s, t, a, n, m, i)?);
    }
    Ok(out)
}
