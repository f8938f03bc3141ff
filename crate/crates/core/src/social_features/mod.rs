//! Politeness and positivity scoring.
//!
//! Politeness comes from a logistic model over counts of 21 politeness
//! strategies; positivity is the positive proportion from a lexicon-based
//! sentiment analyzer. Together they form the [`SocialVector`].

mod politeness;
mod sentiment;
mod strategies;

use serde::{Deserialize, Serialize};

pub use politeness::{
    bundled_fixture, featurize_politeness, featurize_tokens, labeled_utterances,
    load_labeled_fixture, load_request_corpus, parse_labeled_fixture, quartile_labels,
    score_politeness, train_politeness, train_politeness_traced, PolitenessFeatures,
    PolitenessModel,
};
pub use sentiment::{
    score_sentiment, score_text, SentimentLexicon, SentimentScores, BOOSTER_DECREMENT,
    BOOSTER_INCREMENT, BUT_WEIGHT, CAPS_INCREMENT, EXCLAMATION_INCREMENT, MAX_EXCLAMATIONS,
    NEGATION_SCALAR, NEGATION_WINDOW,
};
pub use strategies::{
    detect_strategies, sentences, Pattern, Position, Rule, Strategy, StrategyHit, NUM_STRATEGIES,
    RULES,
};

use crate::corpus::{Redactor, ReplyCovariates, Utterance};
use crate::Result;

/// Regularization used for the model trained on the bundled fixture.
pub const DEFAULT_POLITENESS_REG: f64 = 0.05;

/// The conditioning input of the generation model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SocialVector {
    pub politeness: f64,
    pub positivity: f64,
}

impl SocialVector {
    pub fn new(politeness: f64, positivity: f64) -> Self {
        Self {
            politeness,
            positivity,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.politeness, self.positivity]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialScorer {
    pub politeness: PolitenessModel,
    pub lexicon: SentimentLexicon,
}

impl SocialScorer {
    pub fn new(politeness: PolitenessModel, lexicon: SentimentLexicon) -> Self {
        Self {
            politeness,
            lexicon,
        }
    }

    /// Politeness model trained on the bundled labeled requests, paired with
    /// the full bundled valence lexicon.
    pub fn bundled() -> Result<Self> {
        let data = labeled_utterances(&bundled_fixture(), &Redactor::default());
        let model = train_politeness(&data, DEFAULT_POLITENESS_REG, 0)?;
        Ok(Self::new(model, SentimentLexicon::full()))
    }

    pub fn politeness_score(&self, utterance: &Utterance) -> f64 {
        score_politeness(&self.politeness, utterance)
    }

    pub fn sentiment(&self, utterance: &Utterance) -> SentimentScores {
        score_sentiment(&self.lexicon, utterance)
    }

    pub fn positivity_score(&self, utterance: &Utterance) -> f64 {
        self.sentiment(utterance).pos
    }

    pub fn social_vector(&self, utterance: &Utterance) -> SocialVector {
        SocialVector::new(
            self.politeness_score(utterance),
            self.positivity_score(utterance),
        )
    }
}

impl ReplyCovariates for SocialScorer {
    fn politeness(&self, reply: &Utterance) -> f64 {
        self.politeness_score(reply)
    }

    fn positivity(&self, reply: &Utterance) -> f64 {
        self.positivity_score(reply)
    }
}
