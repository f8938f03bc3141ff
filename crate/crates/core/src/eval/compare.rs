use serde::{Deserialize, Serialize};

use super::bleu::{bleu, BleuConfig};
use super::embedding::{embedding_similarity, EmbeddingTable};
use crate::corpus::MessagePair;
use crate::neural::{generate, Seq2SeqModel, Variant, DEFAULT_MAX_LEN};
use crate::social_features::SocialScorer;
use crate::stats::{mean, paired_t_test, welch_t_test, TestKind, TestResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub bleu: BleuConfig,
    pub max_len: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            bleu: BleuConfig::default(),
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub n: usize,
    pub bleu_lexical: f64,
    pub bleu_social: f64,
    pub bleu_gain: f64,
    pub similarity_lexical: f64,
    pub similarity_social: f64,
    pub similarity_gain: f64,
    /// Pairs with a defined similarity for both models.
    pub similarity_n: usize,
    pub excluded: usize,
    /// Paired t on per-pair similarity, social minus lexical.
    pub paired: TestResult,
    pub welch: TestResult,
    pub lexical_outputs: Vec<Vec<String>>,
    pub social_outputs: Vec<Vec<String>>,
}

/// `new / old - 1`.
pub fn relative_gain(old: f64, new: f64) -> f64 {
    if old == new {
        0.0
    } else {
        new / old - 1.0
    }
}

/// Paired t, with identical samples reported as t = 0, p = 1.
pub(crate) fn paired_or_null(a: &[f64], b: &[f64]) -> Result<TestResult> {
    match paired_t_test(a, b) {
        Err(Error::ZeroDifference) => Ok(TestResult {
            kind: TestKind::PairedT,
            statistic: 0.0,
            df: a.len() as f64 - 1.0,
            p_value: 1.0,
        }),
        other => other,
    }
}

pub(crate) fn welch_or_null(a: &[f64], b: &[f64]) -> Result<TestResult> {
    match welch_t_test(a, b) {
        Err(Error::ZeroDifference) => Ok(TestResult {
            kind: TestKind::WelchT,
            statistic: 0.0,
            df: (a.len() + b.len()) as f64 - 2.0,
            p_value: 1.0,
        }),
        other => other,
    }
}

/// Responses of `model` for each pair; a social model is fed the vector
/// scored from the ground-truth reply.
pub fn generate_responses(
    model: &Seq2SeqModel,
    pairs: &[MessagePair],
    scorer: &SocialScorer,
    max_len: usize,
) -> Result<Vec<Vec<String>>> {
    pairs
        .iter()
        .map(|p| {
            let s = (model.variant() == Variant::LexicalSocial)
                .then(|| scorer.social_vector(&p.agent_msg));
            generate(model, &p.driver_msg.tokens, s, max_len)
        })
        .collect()
}

/// Content preservation of two models on the same test pairs.
pub fn compare_models(
    lexical: &Seq2SeqModel,
    social: &Seq2SeqModel,
    test_pairs: &[MessagePair],
    table: &EmbeddingTable,
    scorer: &SocialScorer,
    config: &CompareConfig,
) -> Result<ModelComparison> {
    if lexical.split_fingerprint != social.split_fingerprint {
        return Err(Error::Precondition(format!(
            "models were trained on different splits ({} vs {})",
            lexical.split_fingerprint.as_deref().unwrap_or("none"),
            social.split_fingerprint.as_deref().unwrap_or("none")
        )));
    }
    if test_pairs.is_empty() {
        return Err(Error::InvalidInput("no test pairs".into()));
    }
    let references: Vec<Vec<String>> = test_pairs
        .iter()
        .map(|p| p.agent_msg.tokens.clone())
        .collect();
    let lexical_outputs = generate_responses(lexical, test_pairs, scorer, config.max_len)?;
    let social_outputs = generate_responses(social, test_pairs, scorer, config.max_len)?;
    let bleu_lexical = bleu(&lexical_outputs, &references, &config.bleu)?;
    let bleu_social = bleu(&social_outputs, &references, &config.bleu)?;

    let mut sim_lex = Vec::new();
    let mut sim_soc = Vec::new();
    for ((l, s), r) in lexical_outputs.iter().zip(&social_outputs).zip(&references) {
        match (
            embedding_similarity(l, r, table),
            embedding_similarity(s, r, table),
        ) {
            (Ok(a), Ok(b)) => {
                sim_lex.push(a);
                sim_soc.push(b);
            }
            (Err(Error::UndefinedSimilarity(_)), _) | (_, Err(Error::UndefinedSimilarity(_))) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    if sim_lex.len() < 2 {
        return Err(Error::UndefinedSimilarity(format!(
            "only {} pairs have a defined similarity for both models",
            sim_lex.len()
        )));
    }
    let similarity_lexical = mean(&sim_lex);
    let similarity_social = mean(&sim_soc);
    Ok(ModelComparison {
        n: test_pairs.len(),
        bleu_lexical,
        bleu_social,
        bleu_gain: relative_gain(bleu_lexical, bleu_social),
        similarity_lexical,
        similarity_social,
        similarity_gain: relative_gain(similarity_lexical, similarity_social),
        similarity_n: sim_lex.len(),
        excluded: test_pairs.len() - sim_lex.len(),
        paired: paired_or_null(&sim_soc, &sim_lex)?,
        welch: welch_or_null(&sim_soc, &sim_lex)?,
        lexical_outputs,
        social_outputs,
    })
}
