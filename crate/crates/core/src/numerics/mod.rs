//! Dense vectors and matrices plus the neural primitives the encoder-decoder
//! is built from. Everything is generic over [`Scalar`] so the same code runs
//! in `f32` for models and in `f64` for gradient verification.

mod attention;
mod gradcheck;
mod loss;
mod lstm;
mod scalar;
mod sgd;
mod tensor;

pub use attention::{attention, attention_backward, Attended};
pub use gradcheck::grad_check;
pub use loss::{log_softmax, softmax_cross_entropy, softmax_in_place};
pub use lstm::{lstm_cell_backward, lstm_cell_forward, lstm_cell_forward_cached, LstmCache, LstmCellParams, LstmGrads};
pub use scalar::Scalar;
pub use sgd::{clip_global_norm, global_norm, sgd_step};
pub use tensor::{axpy, dot, Tensor};
