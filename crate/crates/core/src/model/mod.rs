//! The two-layer uni-directional LSTM encoder and two-layer LSTM decoder with
//! dot-product attention, plus vocabularies, training and checkpoints.

mod checkpoint;
mod network;
mod params;
mod search;
mod train;
mod vocab;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, FORMAT_VERSION, MAGIC};
pub use network::{decode_step, encode_extend, encode_offline, loss_and_grad, DecState, Dropout, EncState};
pub use params::{Seq2SeqParams, LAYERS};
pub use search::{beam_search, greedy_continue, Hypothesis, IncrementalModel};
pub use train::{fine_tune, train_full, EpochReport, TrainConfig};
pub use vocab::{Vocabulary, BOS, EOS, PAD, UNK};

/// Decode length cap used for both offline and incremental decoding.
pub fn max_decode_len(source_len: usize) -> usize {
    2 * source_len + 5
}
