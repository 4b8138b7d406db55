//! Latency and quality measurement.

mod ap;
mod bleu;
mod eval;

pub use ap::average_proportion;
pub use bleu::{corpus_bleu, sentence_bleu_smoothed, BleuStats};
pub use eval::{evaluate_agent, evaluate_with, EvalResult, SentenceEval};
