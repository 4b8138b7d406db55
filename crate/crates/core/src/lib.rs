//! Simultaneous translation with a dynamically built encoder and attention.
//!
//! A two-layer uni-directional LSTM encoder feeds a two-layer LSTM decoder
//! through dot-product attention. Source tokens arrive one at a time (READ);
//! after each one a commit agent decides how many target words of the current
//! greedy or beam continuation become final (WRITE). Latency is measured by
//! average proportion and quality by corpus BLEU.
//!
//! Module map:
//! - [`numerics`]: tensors, LSTM cell, attention, loss, SGD, gradient checking
//! - [`model`]: vocabulary, encoder-decoder, training, checkpoints
//! - [`stream`]: READ/WRITE sessions, commit-point beam search, chunk decoding
//! - [`agents`]: WUE, WIW, WID, STATIC-RW and the AP-constrained tuner
//! - [`metrics`]: average proportion, BLEU, agent evaluation
//! - [`transforms`]: alignments, chunk and Add-M corpora, synthetic tasks

pub mod agents;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod stream;
pub mod transforms;

pub use agents::{Agent, AgentContext, AgentKind, GridPoint, Policy, TuneResult};
pub use error::{Error, Result};

pub use metrics::{average_proportion, corpus_bleu, EvalResult};
pub use model::{Checkpoint, DecState, EncState, IncrementalModel, Seq2SeqParams, TrainConfig, Vocabulary};
pub use numerics::{Scalar, Tensor};
pub use stream::{run_stream, CommitTrace, Search, StreamSession};
