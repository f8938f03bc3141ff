//! Embedding + LSTM encoder/decoder with an optional social-fusion layer
//! between encoder and decoder, trained by plain SGD with early stopping.

pub mod checkpoint;
mod generate;
mod gradcheck;
mod model;
mod train;
mod vocab;

pub use crate::social_features::SocialVector;
pub use generate::{generate, generate_beam, generate_ids, DEFAULT_MAX_LEN};
pub use gradcheck::{
    gradient_check, gradient_check_seeded, relative_error, GradientCheckReport, DEFAULT_EPSILON,
    MIN_CHECKED, RELATIVE_FLOOR,
};
pub use model::{
    EncoderState, Example, ModelConfig, Params, Precision, Seq2SeqModel, Tensor, Variant,
    FORGET_BIAS, INIT_RANGE, SOCIAL_DIM, SOCIAL_INIT_RANGE,
};
pub use train::{
    make_examples, perplexity, train, train_examples, EpochRecord, TrainConfig, TrainingLog,
};
pub use vocab::{build_vocab, Vocab, EOS, EOS_ID, PAD, PAD_ID, RESERVED, SOS, SOS_ID, UNK, UNK_ID};
