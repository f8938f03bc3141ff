//! Token-pattern detectors for politeness strategies.
//!
//! Sentences end after `.`, `!` or `?`. Every rule in [`RULES`] is a plain
//! token pattern; the table is reproduced in the README.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub const NUM_STRATEGIES: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Gratitude,
    Apology,
    Please,
    PleaseStart,
    IndirectCouldYou,
    IndirectWouldYou,
    Greeting,
    Deference,
    PositiveLexicon,
    NegativeLexicon,
    Hedge,
    FirstPerson,
    FirstPersonStart,
    SecondPerson,
    SecondPersonStart,
    QuestionDirect,
    QuestionIndirect,
    Factuality,
    CounterfactualModal,
    IndicativeModal,
    SentenceInitialPleaseAbsent,
}

impl Strategy {
    pub const ALL: [Strategy; NUM_STRATEGIES] = [
        Strategy::Gratitude,
        Strategy::Apology,
        Strategy::Please,
        Strategy::PleaseStart,
        Strategy::IndirectCouldYou,
        Strategy::IndirectWouldYou,
        Strategy::Greeting,
        Strategy::Deference,
        Strategy::PositiveLexicon,
        Strategy::NegativeLexicon,
        Strategy::Hedge,
        Strategy::FirstPerson,
        Strategy::FirstPersonStart,
        Strategy::SecondPerson,
        Strategy::SecondPersonStart,
        Strategy::QuestionDirect,
        Strategy::QuestionIndirect,
        Strategy::Factuality,
        Strategy::CounterfactualModal,
        Strategy::IndicativeModal,
        Strategy::SentenceInitialPleaseAbsent,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Gratitude => "gratitude",
            Strategy::Apology => "apology",
            Strategy::Please => "please",
            Strategy::PleaseStart => "please_start",
            Strategy::IndirectCouldYou => "indirect_could_you",
            Strategy::IndirectWouldYou => "indirect_would_you",
            Strategy::Greeting => "greeting",
            Strategy::Deference => "deference",
            Strategy::PositiveLexicon => "positive_lexicon",
            Strategy::NegativeLexicon => "negative_lexicon",
            Strategy::Hedge => "hedge",
            Strategy::FirstPerson => "first_person",
            Strategy::FirstPersonStart => "first_person_start",
            Strategy::SecondPerson => "second_person",
            Strategy::SecondPersonStart => "second_person_start",
            Strategy::QuestionDirect => "question_direct",
            Strategy::QuestionIndirect => "question_indirect",
            Strategy::Factuality => "factuality",
            Strategy::CounterfactualModal => "counterfactual_modal",
            Strategy::IndicativeModal => "indicative_modal",
            Strategy::SentenceInitialPleaseAbsent => "sentence_initial_please_absent",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Anywhere,
    SentenceStart,
    NotSentenceStart,
}

#[derive(Debug, Clone, Copy)]
pub enum Pattern {
    /// One token from the set.
    Word(&'static [&'static str], Position),
    /// Consecutive tokens, each from its own set; position applies to the first.
    Phrase(&'static [&'static [&'static str]], Position),
    /// A whole sentence ending in `?` whose first token is in the set.
    Question(&'static [&'static str]),
    /// A whole sentence ending in `?`, first token in the set, with no
    /// `please` anywhere in it.
    QuestionWithoutPlease(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub strategy: Strategy,
    pub pattern: Pattern,
}

pub const GRATITUDE: &[&str] = &[
    "thank",
    "thanks",
    "thankful",
    "thx",
    "appreciate",
    "appreciated",
    "grateful",
];
pub const APOLOGY: &[&str] = &[
    "sorry",
    "apologize",
    "apologise",
    "apologies",
    "apology",
    "apologizing",
    "oops",
    "excuse",
    "pardon",
    "regret",
];
pub const PLEASE: &[&str] = &["please", "pls", "plz"];
pub const GREETING: &[&str] = &["hi", "hello", "hey", "greetings", "howdy"];
pub const GREETING_TIMES: &[&str] = &["morning", "afternoon", "evening"];
pub const DEFERENCE: &[&str] = &[
    "great",
    "good",
    "nice",
    "interesting",
    "cool",
    "excellent",
    "awesome",
    "wonderful",
    "fantastic",
];
pub const POSITIVE: &[&str] = &[
    "good",
    "great",
    "nice",
    "excellent",
    "awesome",
    "wonderful",
    "fantastic",
    "happy",
    "glad",
    "pleased",
    "helpful",
    "perfect",
    "amazing",
    "best",
    "better",
    "love",
    "enjoy",
    "welcome",
    "excited",
    "exciting",
    "congrats",
    "congratulations",
    "luck",
    "lucky",
    "fine",
    "easy",
    "clear",
    "clearer",
    "quick",
    "kind",
    "kindly",
    "correct",
    "beautiful",
    "success",
    "successful",
    "smooth",
    "super",
    "brilliant",
    "fortunately",
    "hope",
    "hopefully",
    "pleasure",
    "terrific",
    "safe",
    "ready",
    "understanding",
    "patience",
];
pub const NEGATIVE: &[&str] = &[
    "bad",
    "wrong",
    "problem",
    "problems",
    "issue",
    "issues",
    "error",
    "fail",
    "failed",
    "failure",
    "unfortunately",
    "terrible",
    "awful",
    "horrible",
    "poor",
    "annoying",
    "angry",
    "upset",
    "disappointed",
    "confused",
    "confusing",
    "confusion",
    "difficult",
    "hard",
    "trouble",
    "worse",
    "worst",
    "broken",
    "missing",
    "incomplete",
    "blurry",
    "late",
    "delay",
    "delayed",
    "unacceptable",
    "stupid",
    "hate",
    "slow",
    "lost",
    "inconvenience",
    "closed",
    "forgot",
    "forget",
];
pub const HEDGE: &[&str] = &[
    "think",
    "believe",
    "guess",
    "suppose",
    "suggest",
    "maybe",
    "perhaps",
    "possibly",
    "probably",
    "seem",
    "seems",
    "apparently",
    "somewhat",
    "likely",
    "hope",
];
pub const FIRST_PERSON: &[&str] = &[
    "i", "me", "my", "mine", "myself", "i'm", "i'll", "i've", "i'd",
];
pub const SECOND_PERSON: &[&str] = &[
    "you", "your", "yours", "yourself", "you're", "you'll", "you've", "you'd",
];
pub const WH_WORDS: &[&str] = &[
    "what", "why", "who", "whom", "whose", "how", "where", "when", "which",
];
pub const AUXILIARIES: &[&str] = &[
    "can", "could", "would", "will", "do", "does", "did", "is", "are", "was", "were", "may",
    "might", "have", "has", "should", "shall", "am",
];
pub const REQUEST_MODALS: &[&str] = &["can", "could", "would", "will"];
pub const FACTUALITY: &[&str] = &[
    "really",
    "actually",
    "honestly",
    "surely",
    "truly",
    "indeed",
    "definitely",
];
pub const FACT_INTRO: &[&str] = &["point", "reality", "truth", "fact"];
pub const COUNTERFACTUAL: &[&str] = &["could", "would", "might", "should"];

pub static RULES: &[Rule] = &[
    Rule {
        strategy: Strategy::Gratitude,
        pattern: Pattern::Word(GRATITUDE, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Apology,
        pattern: Pattern::Word(APOLOGY, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Please,
        pattern: Pattern::Word(PLEASE, Position::NotSentenceStart),
    },
    Rule {
        strategy: Strategy::PleaseStart,
        pattern: Pattern::Word(PLEASE, Position::SentenceStart),
    },
    Rule {
        strategy: Strategy::IndirectCouldYou,
        pattern: Pattern::Phrase(&[&["could"], &["you"]], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::IndirectWouldYou,
        pattern: Pattern::Phrase(&[&["would"], &["you"]], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Greeting,
        pattern: Pattern::Word(GREETING, Position::SentenceStart),
    },
    Rule {
        strategy: Strategy::Greeting,
        pattern: Pattern::Phrase(&[&["good"], GREETING_TIMES], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Deference,
        pattern: Pattern::Word(DEFERENCE, Position::SentenceStart),
    },
    Rule {
        strategy: Strategy::PositiveLexicon,
        pattern: Pattern::Word(POSITIVE, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::NegativeLexicon,
        pattern: Pattern::Word(NEGATIVE, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Hedge,
        pattern: Pattern::Word(HEDGE, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::FirstPerson,
        pattern: Pattern::Word(FIRST_PERSON, Position::NotSentenceStart),
    },
    Rule {
        strategy: Strategy::FirstPersonStart,
        pattern: Pattern::Word(FIRST_PERSON, Position::SentenceStart),
    },
    Rule {
        strategy: Strategy::SecondPerson,
        pattern: Pattern::Word(SECOND_PERSON, Position::NotSentenceStart),
    },
    Rule {
        strategy: Strategy::SecondPersonStart,
        pattern: Pattern::Word(SECOND_PERSON, Position::SentenceStart),
    },
    Rule {
        strategy: Strategy::QuestionDirect,
        pattern: Pattern::Question(WH_WORDS),
    },
    Rule {
        strategy: Strategy::QuestionIndirect,
        pattern: Pattern::Question(AUXILIARIES),
    },
    Rule {
        strategy: Strategy::Factuality,
        pattern: Pattern::Word(FACTUALITY, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Factuality,
        pattern: Pattern::Phrase(&[&["in"], &["fact"]], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::Factuality,
        pattern: Pattern::Phrase(&[&["the"], FACT_INTRO, &["is"]], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::CounterfactualModal,
        pattern: Pattern::Word(COUNTERFACTUAL, Position::Anywhere),
    },
    Rule {
        strategy: Strategy::IndicativeModal,
        pattern: Pattern::Phrase(&[&["can", "will"], &["you"]], Position::Anywhere),
    },
    Rule {
        strategy: Strategy::SentenceInitialPleaseAbsent,
        pattern: Pattern::QuestionWithoutPlease(REQUEST_MODALS),
    },
];

/// One detected strategy occurrence; `rule` indexes [`RULES`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyHit {
    pub strategy: Strategy,
    pub span: Range<usize>,
    pub rule: usize,
}

pub fn is_sentence_end(token: &str) -> bool {
    matches!(token, "." | "!" | "?")
}

/// Token ranges of sentences; the terminator belongs to its sentence.
pub fn sentences(tokens: &[String]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if is_sentence_end(t) {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        out.push(start..tokens.len());
    }
    out
}

fn position_ok(position: Position, at: usize, sentence_start: usize) -> bool {
    match position {
        Position::Anywhere => true,
        Position::SentenceStart => at == sentence_start,
        Position::NotSentenceStart => at != sentence_start,
    }
}

/// All strategy occurrences, ordered by span start, then rule order.
pub fn detect_strategies(tokens: &[String]) -> Vec<StrategyHit> {
    let mut hits = Vec::new();
    for sentence in sentences(tokens) {
        let s = &tokens[sentence.clone()];
        for (rule_idx, rule) in RULES.iter().enumerate() {
            let hit = |span: Range<usize>| StrategyHit {
                strategy: rule.strategy,
                span,
                rule: rule_idx,
            };
            match rule.pattern {
                Pattern::Word(words, position) => {
                    for (k, t) in s.iter().enumerate() {
                        if words.contains(&t.as_str()) && position_ok(position, k, 0) {
                            let at = sentence.start + k;
                            hits.push(hit(at..at + 1));
                        }
                    }
                }
                Pattern::Phrase(seq, position) => {
                    if s.len() < seq.len() {
                        continue;
                    }
                    for k in 0..=(s.len() - seq.len()) {
                        let matched = seq
                            .iter()
                            .zip(&s[k..])
                            .all(|(set, t)| set.contains(&t.as_str()));
                        if matched && position_ok(position, k, 0) {
                            let at = sentence.start + k;
                            hits.push(hit(at..at + seq.len()));
                        }
                    }
                }
                Pattern::Question(first) => {
                    if s.last().is_some_and(|t| t == "?") && first.contains(&s[0].as_str()) {
                        hits.push(hit(sentence.clone()));
                    }
                }
                Pattern::QuestionWithoutPlease(first) => {
                    if s.last().is_some_and(|t| t == "?")
                        && first.contains(&s[0].as_str())
                        && !s.iter().any(|t| PLEASE.contains(&t.as_str()))
                    {
                        hits.push(hit(sentence.clone()));
                    }
                }
            }
        }
    }
    hits.sort_by_key(|h| (h.span.start, h.rule));
    hits
}
