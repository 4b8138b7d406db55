use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{invalid, Result};

const ORDER: usize = 4;

/// Clipped n-gram matches and totals for orders 1 to 4, plus lengths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; ORDER],
    pub totals: [u64; ORDER],
    pub cand_len: u64,
    pub ref_len: u64,
}

fn ngram_counts<T: Eq + Hash>(toks: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut m = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

impl BleuStats {
    pub fn sentence<T: Eq + Hash>(cand: &[T], reference: &[T]) -> Self {
        let mut s = Self {
            cand_len: cand.len() as u64,
            ref_len: reference.len() as u64,
            ..Self::default()
        };
        for n in 1..=ORDER {
            let r = ngram_counts(reference, n);
            let c = ngram_counts(cand, n);
            s.totals[n - 1] = cand.len().saturating_sub(n - 1) as u64;
            s.matches[n - 1] = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
        }
        s
    }

    pub fn add(&mut self, o: &Self) {
        for n in 0..ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.cand_len += o.cand_len;
        self.ref_len += o.ref_len;
    }

    fn brevity_penalty(&self) -> f64 {
        if self.cand_len == 0 {
            0.0
        } else if self.cand_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.cand_len as f64).exp()
        } else {
            1.0
        }
    }

    /// Unsmoothed BLEU-4; zero when any precision is zero.
    pub fn bleu(&self) -> f64 {
        if self.matches.contains(&0) {
            return 0.0;
        }
        let log_p: f64 = (0..ORDER)
            .map(|n| (self.matches[n] as f64 / self.totals[n] as f64).ln())
            .sum::<f64>()
            / ORDER as f64;
        self.brevity_penalty() * log_p.exp()
    }

    /// Add-one smoothing for orders 2 to 4. A sentence-level diagnostic only,
    /// not comparable to corpus BLEU.
    pub fn bleu_add_one(&self) -> f64 {
        if self.matches[0] == 0 {
            return 0.0;
        }
        let log_p: f64 = (0..ORDER)
            .map(|n| {
                let (m, t) = (self.matches[n] as f64, self.totals[n] as f64);
                if n == 0 {
                    (m / t).ln()
                } else {
                    ((m + 1.0) / (t + 1.0)).ln()
                }
            })
            .sum::<f64>()
            / ORDER as f64;
        self.brevity_penalty() * log_p.exp()
    }
}

/// Corpus BLEU-4 over pooled counts, in `[0, 1]`.
pub fn corpus_bleu<T: Eq + Hash>(candidates: &[Vec<T>], references: &[Vec<T>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(invalid(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    if references.is_empty() {
        return Err(invalid("no references"));
    }
    let mut total = BleuStats::default();
    for (c, r) in candidates.iter().zip(references) {
        total.add(&BleuStats::sentence(c, r));
    }
    Ok(total.bleu())
}

pub fn sentence_bleu_smoothed<T: Eq + Hash>(cand: &[T], reference: &[T]) -> f64 {
    BleuStats::sentence(cand, reference).bleu_add_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_one() {
        let c = vec![toks("a b c d e"), toks("the cat sat on the mat")];
        assert!((corpus_bleu(&c, &c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_unigrams() {
        let s = BleuStats::sentence(&toks("the the the the the the the"), &toks("the cat is on the mat"));
        assert_eq!((s.matches[0], s.totals[0]), (2, 7));
        assert_eq!(s.matches[1], 0);
    }

    #[test]
    fn empty_candidate_pools() {
        let c = vec![toks("a b c d e"), vec![]];
        let r = vec![toks("a b c d e"), toks("f g")];
        let b = corpus_bleu(&c, &r).unwrap();
        assert!((b - (1.0f64 - 7.0 / 5.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn all_empty_candidates_score_zero() {
        let c: Vec<Vec<&str>> = vec![vec![]];
        assert_eq!(corpus_bleu(&c, &[toks("a b")]).unwrap(), 0.0);
    }

    #[test]
    fn short_sentence_has_no_four_grams() {
        let c = vec![toks("a b c")];
        assert_eq!(corpus_bleu(&c, &c).unwrap(), 0.0);
        assert!(sentence_bleu_smoothed(&c[0], &c[0]) > 0.0);
    }

    #[test]
    fn rejects_mismatch() {
        assert!(corpus_bleu(&[toks("a")], &[]).is_err());
        let e: Vec<Vec<&str>> = vec![];
        assert!(corpus_bleu(&e, &e).is_err());
    }

    #[test]
    fn hand_computed() {
        let c = toks("the cat sat on a mat");
        let r = toks("the cat sat on the mat");
        let s = BleuStats::sentence(&c, &r);
        assert_eq!(s.matches, [5, 3, 2, 1]);
        assert_eq!(s.totals, [6, 5, 4, 3]);
        let expect = (5.0f64 / 6.0 * 3.0 / 5.0 * 2.0 / 4.0 * 1.0 / 3.0).powf(0.25);
        assert!((s.bleu() - expect).abs() < 1e-12);
    }
}
