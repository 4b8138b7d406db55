use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Alignment;
use crate::error::{invalid, Error, Result};

/// Toy translation tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthTask {
    /// Target equals source; alignment `i-i`.
    Copy,
    /// Target is the source reversed; every target word depends on the
    /// sentence end, so early commits hurt.
    Reverse,
    /// Target is the source rotated right by one: the last source word
    /// comes first, everything else shifts one place.
    Shift,
}

impl FromStr for SynthTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "copy" => Ok(Self::Copy),
            "reverse" => Ok(Self::Reverse),
            "shift" => Ok(Self::Shift),
            _ => Err(invalid(format!("unknown task {s:?} (copy|reverse|shift)"))),
        }
    }
}

impl fmt::Display for SynthTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Copy => "copy",
            Self::Reverse => "reverse",
            Self::Shift => "shift",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub src: Vec<Vec<String>>,
    pub tgt: Vec<Vec<String>>,
    pub align: Vec<Alignment>,
}

impl SynthTask {
    /// Target index receiving source word `i` in a sentence of length `n`.
    pub fn target_of(self, i: usize, n: usize) -> usize {
        match self {
            Self::Copy => i,
            Self::Reverse => n - 1 - i,
            Self::Shift => (i + 1) % n,
        }
    }

    pub fn apply<S: Clone>(self, src: &[S]) -> Vec<S> {
        let n = src.len();
        let mut out = src.to_vec();
        for (i, s) in src.iter().enumerate() {
            out[self.target_of(i, n)] = s.clone();
        }
        out
    }
}

/// Deterministic random corpus for `task` with words `w0..w{vocab_size-1}`.
pub fn gen_synthetic(
    task: SynthTask,
    n_sentences: usize,
    vocab_size: usize,
    len_min: usize,
    len_max: usize,
    seed: u64,
) -> Result<SyntheticCorpus> {
    if vocab_size < 5 {
        return Err(invalid("synthetic vocabulary needs at least 5 words"));
    }
    if len_min == 0 || len_min > len_max {
        return Err(invalid(format!("bad length range {len_min}..={len_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = SyntheticCorpus {
        src: Vec::with_capacity(n_sentences),
        tgt: Vec::with_capacity(n_sentences),
        align: Vec::with_capacity(n_sentences),
    };
    for _ in 0..n_sentences {
        let n = rng.gen_range(len_min..=len_max);
        let src: Vec<String> = (0..n).map(|_| format!("w{}", rng.gen_range(0..vocab_size))).collect();
        corpus.tgt.push(task.apply(&src));
        corpus
            .align
            .push(Alignment::new((0..n).map(|i| (i, task.target_of(i, n)))));
        corpus.src.push(src);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_lines_match() {
        let c = gen_synthetic(SynthTask::Copy, 50, 20, 4, 8, 0).unwrap();
        assert_eq!(c.src, c.tgt);
        assert!(c.src.iter().all(|s| (4..=8).contains(&s.len())));
    }

    #[test]
    fn reverse_and_shift() {
        assert_eq!(SynthTask::Reverse.apply(&["a", "b", "c"]), vec!["c", "b", "a"]);
        assert_eq!(SynthTask::Shift.apply(&["a", "b", "c"]), vec!["c", "a", "b"]);
    }

    #[test]
    fn alignments_point_at_equal_words() {
        for task in [SynthTask::Copy, SynthTask::Reverse, SynthTask::Shift] {
            let c = gen_synthetic(task, 20, 10, 1, 6, 3).unwrap();
            for ((s, t), a) in c.src.iter().zip(&c.tgt).zip(&c.align) {
                assert_eq!(a.points().len(), s.len());
                for &(i, j) in a.points() {
                    assert_eq!(s[i], t[j]);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = gen_synthetic(SynthTask::Reverse, 30, 12, 2, 9, 42).unwrap();
        let b = gen_synthetic(SynthTask::Reverse, 30, 12, 2, 9, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_tiny_vocab_and_bad_lengths() {
        assert!(gen_synthetic(SynthTask::Copy, 1, 4, 1, 2, 0).is_err());
        assert!(gen_synthetic(SynthTask::Copy, 1, 5, 3, 2, 0).is_err());
    }
}
