//! Valence-lexicon sentiment scoring in the VADER style.
//!
//! Rules, in order: lexicon valence per token; ALL-CAPS emphasis when the
//! text mixes cased and uncased words; boosters up to three tokens back
//! (scaled 1, 0.95, 0.9 by distance); negators up to three tokens back flip
//! and damp by 0.74; the clause after "but" is weighted 1.5; up to three
//! exclamation marks add emphasis to the dominant polarity; magnitudes are
//! normalized into (pos, neg, neu).
//!
//! One exception to negation: a prohibitive "don't" before a negative word
//! ("don't forget") damps it without flipping its sign.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punctuation, is_tag, tokenize_cased, Utterance};
use crate::{Error, Result};

pub const BOOSTER_INCREMENT: f64 = 0.293;
pub const BOOSTER_DECREMENT: f64 = -0.293;
pub const CAPS_INCREMENT: f64 = 0.733;
pub const NEGATION_SCALAR: f64 = -0.74;
pub const EXCLAMATION_INCREMENT: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 3;
pub const BUT_WEIGHT: f64 = 1.5;
pub const NEGATION_WINDOW: usize = 3;

const BOOST_UP: &[&str] = &[
    "absolutely",
    "amazingly",
    "awfully",
    "completely",
    "considerable",
    "considerably",
    "decidedly",
    "deeply",
    "effing",
    "enormous",
    "enormously",
    "entirely",
    "especially",
    "exceptional",
    "exceptionally",
    "extreme",
    "extremely",
    "fabulously",
    "flipping",
    "flippin",
    "frackin",
    "fracking",
    "fricking",
    "frickin",
    "frigging",
    "friggin",
    "fully",
    "fuckin",
    "fucking",
    "fuggin",
    "fugging",
    "greatly",
    "hella",
    "highly",
    "hugely",
    "incredible",
    "incredibly",
    "intensely",
    "major",
    "majorly",
    "more",
    "most",
    "particularly",
    "purely",
    "quite",
    "really",
    "remarkably",
    "so",
    "substantially",
    "thoroughly",
    "total",
    "totally",
    "tremendous",
    "tremendously",
    "uber",
    "unbelievably",
    "unusually",
    "utter",
    "utterly",
    "very",
];

const BOOST_DOWN: &[&str] = &[
    "almost",
    "barely",
    "hardly",
    "kinda",
    "kindof",
    "kind-of",
    "less",
    "little",
    "marginal",
    "marginally",
    "occasional",
    "occasionally",
    "partly",
    "scarce",
    "scarcely",
    "slight",
    "slightly",
    "somewhat",
    "sorta",
    "sortof",
    "sort-of",
];

const NEGATORS: &[&str] = &[
    "aint",
    "arent",
    "cannot",
    "cant",
    "couldnt",
    "darent",
    "didnt",
    "doesnt",
    "ain't",
    "aren't",
    "can't",
    "couldn't",
    "daren't",
    "didn't",
    "doesn't",
    "dont",
    "hadnt",
    "hasnt",
    "havent",
    "isnt",
    "mightnt",
    "mustnt",
    "neither",
    "don't",
    "hadn't",
    "hasn't",
    "haven't",
    "isn't",
    "mightn't",
    "mustn't",
    "neednt",
    "needn't",
    "never",
    "none",
    "nope",
    "nor",
    "not",
    "nothing",
    "nowhere",
    "oughtnt",
    "shant",
    "shouldnt",
    "uhuh",
    "wasnt",
    "werent",
    "oughtn't",
    "shan't",
    "shouldn't",
    "uh-uh",
    "wasn't",
    "weren't",
    "without",
    "wont",
    "wouldnt",
    "won't",
    "wouldn't",
    "rarely",
    "seldom",
    "despite",
];

/// Negators that, before a negative word, form a prohibition rather than a
/// negation.
const PROHIBITIVE: &[&str] = &["don't", "dont", "don\u{2019}t"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    valence: BTreeMap<String, f64>,
    boosters: BTreeMap<String, f64>,
    negators: BTreeSet<String>,
}

const FULL_LEXICON: &str = include_str!("../../data/full_lexicon.tsv");
const MINI_LEXICON: &str = include_str!("../../data/mini_lexicon.tsv");

impl SentimentLexicon {
    /// Checks value ranges and that no token plays two roles.
    pub fn new(
        valence: BTreeMap<String, f64>,
        boosters: BTreeMap<String, f64>,
        negators: BTreeSet<String>,
    ) -> Result<Self> {
        if let Some((t, v)) = valence.iter().find(|(_, v)| !(-4.0..=4.0).contains(*v)) {
            return Err(Error::InvalidInput(format!(
                "valence of `{t}` is {v}, outside [-4, 4]"
            )));
        }
        if let Some((t, v)) = boosters.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "booster `{t}` has increment {v}"
            )));
        }
        let conflict = valence
            .keys()
            .filter(|t| boosters.contains_key(*t) || negators.contains(*t))
            .chain(boosters.keys().filter(|t| negators.contains(*t)))
            .next();
        if let Some(t) = conflict {
            return Err(Error::InvalidInput(format!(
                "token `{t}` has conflicting roles"
            )));
        }
        Ok(Self {
            valence,
            boosters,
            negators,
        })
    }

    /// Parses a `#sdl-lexicon v1` valence file and adds the built-in
    /// boosters and negators, dropping any that the file gives a valence.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim_end() == "#sdl-lexicon v1" => {}
            _ => return Err(Error::parse(origin, 1, "missing `#sdl-lexicon v1` header")),
        }
        let mut valence = BTreeMap::new();
        for (i, line) in lines {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (token, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected token<TAB>valence"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::parse(origin, i + 1, format!("bad valence: {e}")))?;
            if !(-4.0..=4.0).contains(&v) {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("valence {v} outside [-4, 4]"),
                ));
            }
            valence.insert(token.to_lowercase(), v);
        }
        let boosters = BOOST_UP
            .iter()
            .map(|t| (t, BOOSTER_INCREMENT))
            .chain(BOOST_DOWN.iter().map(|t| (t, BOOSTER_DECREMENT)))
            .filter(|(t, _)| !valence.contains_key(**t))
            .map(|(t, v)| ((*t).to_owned(), v))
            .collect();
        let negators = NEGATORS
            .iter()
            .filter(|t| !valence.contains_key(**t))
            .map(|t| (*t).to_owned())
            .collect();
        Self::new(valence, boosters, negators)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The complete valence lexicon bundled with the crate.
    pub fn full() -> Self {
        Self::parse(FULL_LEXICON, "full_lexicon.tsv").expect("bundled lexicon parses")
    }

    /// A 600-entry subset, enough for structural checks.
    pub fn mini() -> Self {
        Self::parse(MINI_LEXICON, "mini_lexicon.tsv").expect("bundled lexicon parses")
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valence.get(token).copied()
    }

    pub fn booster(&self, token: &str) -> Option<f64> {
        self.boosters.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token) || token.ends_with("n't")
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub pos: f64,
    pub neg: f64,
    pub neu: f64,
}

impl SentimentScores {
    pub const NEUTRAL: Self = Self {
        pos: 0.0,
        neg: 0.0,
        neu: 1.0,
    };
}

/// Python's `str.isupper`: some cased character and no lowercase one.
fn is_all_caps(word: &str) -> bool {
    word.chars().any(char::is_uppercase) && !word.chars().any(char::is_lowercase)
}

pub fn score_sentiment(lexicon: &SentimentLexicon, utterance: &Utterance) -> SentimentScores {
    score_text(lexicon, &utterance.redacted_text())
}

/// Scores already-redacted text.
pub fn score_text(lexicon: &SentimentLexicon, text: &str) -> SentimentScores {
    let tokens = tokenize_cased(text);
    let exclamations = tokens.iter().filter(|t| *t == "!").count();
    let words: Vec<&str> = tokens
        .iter()
        .map(String::as_str)
        .filter(|t| !is_punctuation(t))
        .collect();
    let lower: Vec<String> = words
        .iter()
        .map(|w| {
            if is_tag(w) {
                (*w).to_owned()
            } else {
                w.to_lowercase()
            }
        })
        .collect();
    let caps = words
        .iter()
        .filter(|w| !is_tag(w) && is_all_caps(w))
        .count();
    let plain = words.iter().filter(|w| !is_tag(w)).count();
    let cap_differential = caps > 0 && caps < plain;

    let mut sentiments = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        let key = lower[i].as_str();
        let Some(base) = lexicon.valence(key) else {
            sentiments.push(0.0);
            continue;
        };
        let mut v = base;
        if cap_differential && !is_tag(word) && is_all_caps(word) {
            v += if v > 0.0 {
                CAPS_INCREMENT
            } else {
                -CAPS_INCREMENT
            };
        }
        for back in 1..=NEGATION_WINDOW.min(i) {
            let prev = lower[i - back].as_str();
            if let Some(b) = lexicon.booster(prev) {
                let mut s = if v < 0.0 { -b } else { b };
                if cap_differential && is_all_caps(words[i - back]) {
                    s += if v > 0.0 {
                        CAPS_INCREMENT
                    } else {
                        -CAPS_INCREMENT
                    };
                }
                s *= match back {
                    1 => 1.0,
                    2 => 0.95,
                    _ => 0.9,
                };
                v += s;
            }
        }
        for back in 1..=NEGATION_WINDOW.min(i) {
            let prev = lower[i - back].as_str();
            if lexicon.is_negator(prev) {
                if v < 0.0 && PROHIBITIVE.contains(&prev) {
                    v *= -NEGATION_SCALAR;
                } else {
                    v *= NEGATION_SCALAR;
                }
            }
        }
        sentiments.push(v);
    }
    if let Some(b) = lower.iter().position(|w| w == "but") {
        for s in &mut sentiments[b + 1..] {
            *s *= BUT_WEIGHT;
        }
    }

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neu_count = 0.0;
    for &s in &sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        } else if s < 0.0 {
            neg_sum += s - 1.0;
        } else {
            neu_count += 1.0;
        }
    }
    let emphasis = exclamations.min(MAX_EXCLAMATIONS) as f64 * EXCLAMATION_INCREMENT;
    if pos_sum > neg_sum.abs() {
        pos_sum += emphasis;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= emphasis;
    }
    let total = pos_sum + neg_sum.abs() + neu_count;
    if total == 0.0 {
        return SentimentScores::NEUTRAL;
    }
    let pos = pos_sum / total;
    let neg = neg_sum.abs() / total;
    SentimentScores {
        pos,
        neg,
        neu: (1.0 - pos - neg).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Redactor, Speaker};
    use proptest::prelude::*;

    fn score(lex: &SentimentLexicon, text: &str) -> SentimentScores {
        score_sentiment(
            lex,
            &Utterance::new(text, Speaker::Agent, 0, &Redactor::default()),
        )
    }

    fn tiny(entries: &[(&str, f64)]) -> SentimentLexicon {
        let mut text = String::from("#sdl-lexicon v1\n");
        for (t, v) in entries {
            text.push_str(&format!("{t}\t{v}\n"));
        }
        SentimentLexicon::parse(&text, "mem").unwrap()
    }

    fn assert_sums_to_one(s: SentimentScores) {
        assert!((s.pos + s.neg + s.neu - 1.0).abs() < 1e-9, "{s:?}");
        assert!(s.pos >= 0.0 && s.neg >= 0.0 && s.neu >= 0.0, "{s:?}");
    }

    #[test]
    fn no_lexicon_tokens_is_neutral() {
        let lex = SentimentLexicon::mini();
        assert_eq!(score(&lex, "the form is here"), SentimentScores::NEUTRAL);
        assert_eq!(score(&lex, ""), SentimentScores::NEUTRAL);
        assert_eq!(score(&lex, "?!"), SentimentScores::NEUTRAL);
    }

    #[test]
    fn single_word_hand_trace() {
        let lex = SentimentLexicon::full();
        let v = lex.valence("good").unwrap();
        assert_eq!(v, 1.9);
        // pos_sum = v + 1 and no neutral words.
        assert_eq!(
            score(&lex, "good"),
            SentimentScores {
                pos: 1.0,
                neg: 0.0,
                neu: 0.0
            }
        );
        // One neutral word: pos = (v + 1) / (v + 2).
        let s = score(&lex, "good day");
        let pos = (v + 1.0) / (v + 2.0);
        assert_eq!(s.pos, pos);
        assert_eq!(s.neu, 1.0 - pos);
        assert_eq!(s.neg, 0.0);
    }

    #[test]
    fn reference_reply_with_full_lexicon() {
        let lex = SentimentLexicon::full();
        let s = score(
            &lex,
            "Nice!  The 2 links I sent you will be your best friends. Good luck! Let me know how it goes for you.",
        );
        assert!((s.pos - 0.49).abs() <= 0.05, "{s:?}");
        assert_eq!(s.neg, 0.0);
        assert!((s.neu - 0.51).abs() <= 0.05, "{s:?}");
    }

    #[test]
    fn prohibitive_negation_keeps_negative_polarity() {
        let lex = tiny(&[("forget", -0.9), ("remember", 0.0)]);
        let dont = score(&lex, "don't forget to upload the photo");
        assert!(dont.neg > 0.0 && dont.pos == 0.0, "{dont:?}");
        let remember = score(&lex, "remember to upload the photo");
        assert_eq!(remember.neg, 0.0);
    }

    #[test]
    fn negation_flips_and_damps() {
        let lex = tiny(&[("good", 1.9)]);
        let s = score(&lex, "not good");
        let v = 1.9 * NEGATION_SCALAR;
        let neg = (v - 1.0).abs();
        assert_eq!(s.neg, neg / (neg + 1.0));
        let far = score(&lex, "not a b c good");
        assert_eq!(far.neg, 0.0);
    }

    #[test]
    fn booster_adds_increment() {
        let lex = tiny(&[("good", 1.9)]);
        let s = score(&lex, "very good");
        let v = 1.9 + BOOSTER_INCREMENT;
        assert_eq!(s.pos, (v + 1.0) / (v + 2.0));
    }

    #[test]
    fn caps_emphasis_needs_mixed_case() {
        let lex = tiny(&[("good", 1.9)]);
        let mixed = score(&lex, "GOOD day");
        let v = 1.9 + CAPS_INCREMENT;
        assert_eq!(mixed.pos, (v + 1.0) / (v + 2.0));
        let shouting = score(&lex, "GOOD DAY");
        assert_eq!(shouting.pos, (1.9 + 1.0) / (1.9 + 2.0));
    }

    #[test]
    fn but_clause_is_upweighted() {
        let lex = tiny(&[("good", 1.0), ("bad", -1.0)]);
        let s = score(&lex, "good but bad");
        let neg = 1.5 + 1.0;
        let pos = 2.0;
        assert_eq!(s.neg, neg / (neg + pos + 1.0));
    }

    #[test]
    fn exclamations_capped_at_three() {
        let lex = tiny(&[("good", 1.9)]);
        let three = score(&lex, "good day!!!");
        let five = score(&lex, "good day!!!!!");
        assert_eq!(three, five);
        let p = 2.9 + 3.0 * EXCLAMATION_INCREMENT;
        assert_eq!(three.pos, p / (p + 1.0));
    }

    #[test]
    fn conflicting_roles_are_rejected() {
        let mut valence = BTreeMap::new();
        valence.insert("very".to_owned(), 1.0);
        let mut boosters = BTreeMap::new();
        boosters.insert("very".to_owned(), 0.293);
        assert!(SentimentLexicon::new(valence.clone(), boosters, BTreeSet::new()).is_err());
        let negators: BTreeSet<String> = ["very".to_owned()].into();
        assert!(SentimentLexicon::new(valence.clone(), BTreeMap::new(), negators).is_err());
        valence.insert("x".to_owned(), 5.0);
        assert!(SentimentLexicon::new(valence, BTreeMap::new(), BTreeSet::new()).is_err());
        // A file valence overrides the built-in role.
        let lex = tiny(&[("very", 1.0)]);
        assert_eq!(lex.booster("very"), None);
    }

    #[test]
    fn lexicon_parse_errors() {
        assert!(SentimentLexicon::parse("good\t1\n", "m").is_err());
        assert!(SentimentLexicon::parse("#sdl-lexicon v1\ngood\n", "m").is_err());
        assert!(SentimentLexicon::parse("#sdl-lexicon v1\ngood\t9\n", "m").is_err());
        assert_eq!(SentimentLexicon::mini().len(), 600);
    }

    proptest! {
        #[test]
        fn proportions_sum_to_one(s in "\\PC{0,60}") {
            assert_sums_to_one(score(&SentimentLexicon::mini(), &s));
        }

        #[test]
        fn proportions_sum_to_one_on_lexicon_words(idx in prop::collection::vec(0usize..12, 0..20)) {
            let words = ["good", "BAD", "not", "very", "but", "!", "great", "don't", "forget", "?", "hate", "no"];
            let text: Vec<&str> = idx.iter().map(|&i| words[i]).collect();
            assert_sums_to_one(score(&SentimentLexicon::full(), &text.join(" ")));
        }
    }
}
