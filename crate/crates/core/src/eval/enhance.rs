use serde::{Deserialize, Serialize};

use super::compare::{paired_or_null, relative_gain, welch_or_null};
use crate::corpus::{MessagePair, Utterance};
use crate::neural::{generate, Seq2SeqModel, Variant, DEFAULT_MAX_LEN};
use crate::social_features::{SocialScorer, SocialVector};
use crate::stats::{mean, sample_sd, TestResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Politeness,
    Positivity,
}

impl Feature {
    pub const ALL: [Feature; 2] = [Feature::Politeness, Feature::Positivity];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Politeness => "politeness",
            Feature::Positivity => "positivity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "politeness" => Some(Feature::Politeness),
            "positivity" => Some(Feature::Positivity),
            _ => None,
        }
    }

    pub fn get(self, s: &SocialVector) -> f64 {
        match self {
            Feature::Politeness => s.politeness,
            Feature::Positivity => s.positivity,
        }
    }

    /// `s` with this feature shifted by `delta`, the other unchanged.
    pub fn shifted(self, s: SocialVector, delta: f64) -> SocialVector {
        match self {
            Feature::Politeness => SocialVector::new(s.politeness + delta, s.positivity),
            Feature::Positivity => SocialVector::new(s.politeness, s.positivity + delta),
        }
    }
}

/// Rates a generated response on one feature.
pub trait ResponseRater {
    fn rate(&self, feature: Feature, response: &[String]) -> f64;
}

impl ResponseRater for SocialScorer {
    fn rate(&self, feature: Feature, response: &[String]) -> f64 {
        let u = Utterance::from_tokens(response);
        match feature {
            Feature::Politeness => self.politeness_score(&u),
            Feature::Positivity => self.positivity_score(&u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancementConfig {
    /// Shift in units of the feature's test-set sample SD.
    pub delta_sd: f64,
    pub max_len: usize,
}

impl Default for EnhancementConfig {
    fn default() -> Self {
        Self {
            delta_sd: 1.0,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementResult {
    pub feature: Feature,
    pub mean_unenhanced: f64,
    pub mean_enhanced: f64,
    pub relative_gain: f64,
    /// Paired t, enhanced minus unenhanced.
    pub t_test: TestResult,
    pub welch: TestResult,
    pub n: usize,
    pub feature_sd: f64,
    pub delta: f64,
    pub unenhanced: Vec<Vec<String>>,
    pub enhanced: Vec<Vec<String>>,
    pub unenhanced_scores: Vec<f64>,
    pub enhanced_scores: Vec<f64>,
}

pub fn rate_all(
    rater: &dyn ResponseRater,
    feature: Feature,
    responses: &[Vec<String>],
) -> Vec<f64> {
    responses.iter().map(|r| rater.rate(feature, r)).collect()
}

/// Generates each test reply twice, with the ground-truth social vector and
/// with `feature` raised by `delta_sd` test-set SDs, and rates both.
pub fn run_enhancement_experiment(
    model: &Seq2SeqModel,
    test_pairs: &[MessagePair],
    feature: Feature,
    conditioning: &SocialScorer,
    rater: &dyn ResponseRater,
    config: &EnhancementConfig,
) -> Result<EnhancementResult> {
    if model.variant() != Variant::LexicalSocial {
        return Err(Error::Variant(
            "enhancement needs a lexical_social model".into(),
        ));
    }
    if test_pairs.len() < 2 {
        return Err(Error::InvalidInput(
            "enhancement needs at least two test pairs".into(),
        ));
    }
    let vectors: Vec<SocialVector> = test_pairs
        .iter()
        .map(|p| conditioning.social_vector(&p.agent_msg))
        .collect();
    let values: Vec<f64> = vectors.iter().map(|s| feature.get(s)).collect();
    let feature_sd = sample_sd(&values);
    if !(feature_sd > 0.0) {
        return Err(Error::DegenerateColumn(format!(
            "{} has zero test-set SD",
            feature.name()
        )));
    }
    let delta = config.delta_sd * feature_sd;
    let mut unenhanced = Vec::with_capacity(test_pairs.len());
    let mut enhanced = Vec::with_capacity(test_pairs.len());
    for (p, s) in test_pairs.iter().zip(&vectors) {
        unenhanced.push(generate(
            model,
            &p.driver_msg.tokens,
            Some(*s),
            config.max_len,
        )?);
        enhanced.push(generate(
            model,
            &p.driver_msg.tokens,
            Some(feature.shifted(*s, delta)),
            config.max_len,
        )?);
    }
    let unenhanced_scores = rate_all(rater, feature, &unenhanced);
    let enhanced_scores = rate_all(rater, feature, &enhanced);
    let mean_unenhanced = mean(&unenhanced_scores);
    let mean_enhanced = mean(&enhanced_scores);
    Ok(EnhancementResult {
        feature,
        mean_unenhanced,
        mean_enhanced,
        relative_gain: relative_gain(mean_unenhanced, mean_enhanced),
        t_test: paired_or_null(&enhanced_scores, &unenhanced_scores)?,
        welch: welch_or_null(&enhanced_scores, &unenhanced_scores)?,
        n: test_pairs.len(),
        feature_sd,
        delta,
        unenhanced,
        enhanced,
        unenhanced_scores,
        enhanced_scores,
    })
}
