//! sarcnet: a from-first-principles classifier for sarcastic news headlines.
//!
//! Two model variants share one pipeline: a CNN-only baseline (embedding →
//! one convolutional layer → max-over-time pooling → MLP head) and a hybrid
//! network that concatenates the CNN features with the attention-weighted
//! context vector of a BiLSTM encoder. Every layer carries a hand-written
//! backward pass that is verified against central finite differences, and
//! training uses AdaDelta with decayed squared-gradient/squared-update
//! accumulators.

pub mod error;
pub mod tensor;

pub use error::{Error, Result};
