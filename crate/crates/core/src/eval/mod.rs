//! Content preservation (BLEU, embedding similarity), the unenhanced vs
//! enhanced generation experiment, and their report tables.

mod bleu;
mod compare;
mod embedding;
mod enhance;
mod report;

pub use bleu::{bleu, bleu_from_stats, ngram_stats, BleuConfig, NgramStats, Smoothing};
pub use compare::{
    compare_models, generate_responses, relative_gain, CompareConfig, ModelComparison,
};
pub use embedding::{embedding_similarity, EmbeddingTable};
pub use enhance::{
    rate_all, run_enhancement_experiment, EnhancementConfig, EnhancementResult, Feature,
    ResponseRater,
};
pub use report::{align, content_table, describe_test, enhancement_table, percent};
