use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{average_proportion, corpus_bleu, sentence_bleu_smoothed};
use crate::agents::Policy;
use crate::error::{invalid, Error, Result};
use crate::model::{Checkpoint, IncrementalModel};
use crate::stream::{run_policy, Search};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceEval {
    pub output: Vec<String>,
    /// Add-one smoothed sentence BLEU; a diagnostic only.
    pub bleu_smoothed: f64,
    /// `None` for an empty translation.
    pub ap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub agent: String,
    pub bleu: f64,
    /// Mean over sentences with a nonempty translation.
    pub ap: Option<f64>,
    pub n_sentences: usize,
    pub excluded_empty: usize,
    #[serde(skip)]
    pub sentences: Vec<SentenceEval>,
}

impl EvalResult {
    /// One row per sentence: index, smoothed BLEU, AP (`NA` if undefined).
    pub fn sentences_tsv(&self) -> String {
        let mut out = String::from("sentence\tbleu_smoothed\tap\n");
        for (i, s) in self.sentences.iter().enumerate() {
            let ap = s.ap.map_or_else(|| "NA".to_string(), |a| format!("{a:.6}"));
            let _ = writeln!(out, "{}\t{:.6}\t{ap}", i + 1, s.bleu_smoothed);
        }
        out
    }
}

/// Runs `policy` over every source sentence and scores the outputs.
/// `detok` maps target ids back to words so BLEU compares strings.
pub fn evaluate_with<M, F>(
    model: &M,
    policy: Policy,
    src_ids: &[Vec<u32>],
    references: &[Vec<String>],
    search: Search,
    detok: F,
) -> Result<EvalResult>
where
    M: IncrementalModel + Sync,
    F: Fn(&[u32]) -> Vec<String> + Sync,
{
    if src_ids.len() != references.len() {
        return Err(invalid(format!(
            "{} source sentences but {} references",
            src_ids.len(),
            references.len()
        )));
    }
    let sentences = src_ids
        .par_iter()
        .zip(references)
        .map(|(src, reference)| {
            let out = run_policy(model, policy, src, search)?;
            let ap = match average_proportion(out.trace.entries(), src.len()) {
                Ok(a) => Some(a),
                Err(Error::UndefinedAp(_)) => None,
                Err(e) => return Err(e),
            };
            let output = detok(&out.translation);
            Ok(SentenceEval {
                bleu_smoothed: sentence_bleu_smoothed(&output, reference),
                output,
                ap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs: Vec<Vec<String>> = sentences.iter().map(|s| s.output.clone()).collect();
    let bleu = corpus_bleu(&outputs, references)?;
    let aps: Vec<f64> = sentences.iter().filter_map(|s| s.ap).collect();
    let ap = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
    Ok(EvalResult {
        agent: policy.to_string(),
        bleu,
        ap,
        n_sentences: sentences.len(),
        excluded_empty: sentences.len() - aps.len(),
        sentences,
    })
}

/// [`evaluate_with`] for a trained checkpoint and whitespace-tokenized text.
pub fn evaluate_agent<S: AsRef<str>>(
    ckpt: &Checkpoint,
    policy: Policy,
    sources: &[Vec<S>],
    references: &[Vec<String>],
    search: Search,
) -> Result<EvalResult> {
    let ids: Vec<Vec<u32>> = sources.iter().map(|s| ckpt.vocab_src.encode(s)).collect();
    evaluate_with(&ckpt.params, policy, &ids, references, search, |t| {
        ckpt.vocab_tgt.decode(t)
    })
}
