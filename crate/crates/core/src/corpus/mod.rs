//! Conversation data model, preprocessing, pairing, splitting and the
//! synthetic corpus generator.

mod io;
mod pairing;
mod split;
mod synth;
pub mod text;

use serde::{Deserialize, Serialize};

pub use io::{
    ingest, read_conversations, read_drivers, read_pairs, write_conversations, write_drivers,
    write_pairs, ConversationRecord, DriverRecord,
};
pub use pairing::{pair_messages, UtterancePair, DEFAULT_PAIR_WINDOW_S};
pub use split::{split_dataset, split_fingerprint, DatasetSplit, SplitRatios};
pub use synth::{
    generate_synthetic_corpus, generate_synthetic_corpus_with, MarkerCounts, OutcomeModel,
    ReplyCovariates, SyntheticCorpus, SyntheticSpec, SYNTHETIC_NAMES,
};
pub use text::{is_punctuation, is_tag, redact_pii, tokenize, tokenize_cased, Redactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Driver,
    Agent,
}

impl Speaker {
    pub fn as_str(self) -> &'static str {
        match self {
            Speaker::Driver => "driver",
            Speaker::Agent => "agent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "driver" => Some(Speaker::Driver),
            "agent" => Some(Speaker::Agent),
            _ => None,
        }
    }
}

/// One message. `tokens` are always `tokenize(redact(raw_text))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub speaker: Speaker,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
}

impl Utterance {
    pub fn new(
        raw_text: impl Into<String>,
        speaker: Speaker,
        timestamp: i64,
        redactor: &Redactor,
    ) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&redactor.redact(&raw_text));
        Self {
            raw_text,
            tokens,
            speaker,
            timestamp,
        }
    }

    /// An agent utterance built from already-tokenized text, e.g. a generated reply.
    pub fn from_tokens(tokens: &[String]) -> Self {
        Self::new(tokens.join(" "), Speaker::Agent, 0, &Redactor::default())
    }

    /// Text after redaction, with original casing.
    pub fn redacted_text(&self) -> String {
        redact_pii(&self.raw_text)
    }
}

/// A driver inquiry, the agent reply sent within the pairing window, the
/// driver's covariates and both engagement outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessagePair {
    pub driver_id: String,
    pub driver_msg: Utterance,
    pub agent_msg: Utterance,
    pub responded_24h: bool,
    pub first_trip_7d: bool,
    pub driver_age: f64,
    pub days_since_signup: f64,
    pub num_prior_driver_msgs: u32,
    pub signup_city: String,
}

impl MessagePair {
    pub fn response_delay(&self) -> i64 {
        self.agent_msg.timestamp - self.driver_msg.timestamp
    }
}
