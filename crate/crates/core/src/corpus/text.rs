//! PII redaction and the rule tokenizer.

use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};

pub const TAG_URL: &str = "<URL>";
pub const TAG_EMAIL: &str = "<EMAIL>";
pub const TAG_NUMBER: &str = "<NUMBER>";
pub const TAG_DATE: &str = "<DATE>";
pub const TAG_NAME: &str = "<NAME>";

static DATE_RE: LazyLock<Regex> = LazyLock::new(|| {
    RegexBuilder::new(
        r"\b\d{1,4}[/.-]\d{1,2}(?:[/.-]\d{1,4})?\b|\b(?:jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec)[a-z]*\.?\s+\d{1,2}(?:st|nd|rd|th)?(?:,?\s+\d{4})?\b",
    )
    .case_insensitive(true)
    .build()
    .expect("date pattern")
});

static URL_RE: LazyLock<Regex> = LazyLock::new(|| {
    RegexBuilder::new(r#"\b(?:https?://|www\.)[^\s<>]*[^\s<>.,!?;:'")\]]"#)
        .case_insensitive(true)
        .build()
        .expect("url pattern")
});

static EMAIL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b").expect("email pattern")
});

static NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").expect("number pattern"));

/// Replaces URLs, emails, digit runs, dates and configured names with tags.
///
/// Rules apply in precedence order DATE > URL > EMAIL > NUMBER > NAME. A
/// lower-precedence match that overlaps a span already claimed is dropped,
/// and passes repeat until the text is stable, so redaction is idempotent.
#[derive(Debug, Clone, Default)]
pub struct Redactor {
    names: Option<Regex>,
}

impl Redactor {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        let alternatives: Vec<String> = names
            .iter()
            .map(|n| n.as_ref().trim())
            .filter(|n| !n.is_empty())
            .map(regex::escape)
            .collect();
        if alternatives.is_empty() {
            return Self { names: None };
        }
        let pattern = format!(r"\b(?:{})\b", alternatives.join("|"));
        let names = RegexBuilder::new(&pattern)
            .case_insensitive(true)
            .build()
            .expect("escaped name list is a valid pattern");
        Self { names: Some(names) }
    }

    pub fn redact(&self, text: &str) -> String {
        let mut current = text.to_owned();
        loop {
            let next = self.single_pass(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    fn single_pass(&self, text: &str) -> String {
        let mut claimed: Vec<(usize, usize, &'static str)> = Vec::new();
        let mut rules: Vec<(&Regex, &'static str)> = vec![
            (&DATE_RE, TAG_DATE),
            (&URL_RE, TAG_URL),
            (&EMAIL_RE, TAG_EMAIL),
            (&NUMBER_RE, TAG_NUMBER),
        ];
        if let Some(names) = &self.names {
            rules.push((names, TAG_NAME));
        }
        let tags = tag_spans(text);
        for (re, tag) in rules {
            for m in re.find_iter(text) {
                let (s, e) = (m.start(), m.end());
                let overlaps =
                    |spans: &[(usize, usize)]| spans.iter().any(|&(a, b)| s < b && a < e);
                let taken: Vec<(usize, usize)> = claimed.iter().map(|&(a, b, _)| (a, b)).collect();
                if overlaps(&taken) || overlaps(&tags) {
                    continue;
                }
                claimed.push((s, e, tag));
            }
        }
        claimed.sort_by_key(|&(s, _, _)| s);
        let mut out = String::with_capacity(text.len());
        let mut cursor = 0;
        for (s, e, tag) in claimed {
            out.push_str(&text[cursor..s]);
            out.push_str(tag);
            cursor = e;
        }
        out.push_str(&text[cursor..]);
        out
    }
}

/// Redacts with the default rules and an empty name list.
pub fn redact_pii(text: &str) -> String {
    static DEFAULT: LazyLock<Redactor> = LazyLock::new(Redactor::default);
    DEFAULT.redact(text)
}

/// Byte spans of `<TAG>` placeholders already present in `text`.
fn tag_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if let Some(len) = tag_len(&text[i..]) {
                spans.push((i, i + len));
                i += len;
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// Length in bytes of a `<UPPER>` placeholder at the start of `s`.
fn tag_len(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('<')?;
    let body = rest.bytes().take_while(u8::is_ascii_uppercase).count();
    if body > 0 && rest.as_bytes().get(body) == Some(&b'>') {
        Some(body + 2)
    } else {
        None
    }
}

pub fn is_tag(token: &str) -> bool {
    tag_len(token) == Some(token.len())
}

/// Tokenizes without changing case: whitespace split, punctuation detached
/// into single-character tokens, `<TAG>` placeholders and word-internal
/// apostrophes kept.
pub fn tokenize_cased(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        while let Some(c) = rest.chars().next() {
            if c == '<' {
                if let Some(len) = tag_len(rest) {
                    tokens.push(rest[..len].to_owned());
                    rest = &rest[len..];
                    continue;
                }
            }
            if c.is_alphanumeric() {
                let len = word_len(rest);
                tokens.push(rest[..len].to_owned());
                rest = &rest[len..];
            } else {
                tokens.push(c.to_string());
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    tokens
}

/// Length of the alphanumeric run at the start of `s`, continuing across an
/// apostrophe only when another alphanumeric follows it.
fn word_len(s: &str) -> usize {
    let mut end = 0;
    let mut chars = s.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let joins = (c == '\'' || c == '\u{2019}')
            && chars.peek().is_some_and(|&(_, n)| n.is_alphanumeric());
        if !(c.is_alphanumeric() || joins) {
            break;
        }
        end = i + c.len_utf8();
    }
    end
}

/// Lowercased tokens; placeholders keep their case.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_cased(text)
        .into_iter()
        .map(|t| if is_tag(&t) { t } else { lowercase(&t) })
        .collect()
}

/// Per-character lowercasing; unlike `str::to_lowercase` it has no
/// context-dependent mappings.
fn lowercase(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

pub fn is_punctuation(token: &str) -> bool {
    !is_tag(token) && !token.chars().any(char::is_alphanumeric)
}
