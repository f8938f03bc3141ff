//! Line-oriented corpus files.
//!
//! Every file starts with a version header (`#sdl-corpus v1`,
//! `#sdl-drivers v1`, `#sdl-pairs v1`); later lines beginning with `#` are
//! comments. Records are tab-separated. Text fields escape backslash, tab,
//! newline and carriage return as `\\`, `\t`, `\n`, `\r`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pairing::pair_indices;
use super::{MessagePair, Redactor, Speaker, Utterance};
use crate::{Error, Result};

pub const CORPUS_HEADER: &str = "#sdl-corpus v1";
pub const DRIVERS_HEADER: &str = "#sdl-drivers v1";
pub const PAIRS_HEADER: &str = "#sdl-pairs v1";

const DAY: i64 = 86_400;

/// One line of a conversation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationRecord {
    pub driver_id: String,
    pub speaker: Speaker,
    pub ts: i64,
    pub text: String,
}

/// Per-driver attributes needed to build covariates during ingest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverRecord {
    pub driver_id: String,
    pub age: f64,
    pub signup_ts: i64,
    pub signup_city: String,
    pub first_trip_ts: Option<i64>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(format!(
                    "bad escape sequence \\{}",
                    other.map(String::from).unwrap_or_default()
                ))
            }
        }
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Data lines of a versioned file as (1-based line number, fields).
fn records(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == header => {}
        Some(h) => {
            return Err(Error::parse(
                path.display(),
                1,
                format!("expected header `{header}`, found `{h}`"),
            ))
        }
        None => {
            return Err(Error::parse(
                path.display(),
                1,
                format!("empty file, expected `{header}`"),
            ))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields = line
            .split('\t')
            .map(unescape)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| Error::parse(path.display(), line_no, m))?;
        out.push((line_no, fields));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    fields: &[String],
    idx: usize,
    name: &str,
) -> Result<T> {
    fields[idx].parse().map_err(|_| {
        Error::parse(
            path.display(),
            line,
            format!("invalid {name}: `{}`", fields[idx]),
        )
    })
}

fn expect_fields(path: &Path, line: usize, fields: &[String], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            path.display(),
            line,
            format!("expected {n} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn bool01(path: &Path, line: usize, s: &str, name: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::parse(
            path.display(),
            line,
            format!("{name} must be 0 or 1, found `{s}`"),
        )),
    }
}

pub fn write_conversations(path: &Path, records: &[ConversationRecord]) -> Result<()> {
    let mut out = format!("{CORPUS_HEADER}\n# driver_id\tspeaker\tts\ttext\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            escape(&r.driver_id),
            r.speaker.as_str(),
            r.ts,
            escape(&r.text)
        );
    }
    write_file(path, &out)
}

pub fn read_conversations(path: &Path) -> Result<Vec<ConversationRecord>> {
    records(path, CORPUS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            expect_fields(path, line, &f, 4)?;
            let speaker = Speaker::parse(&f[1]).ok_or_else(|| {
                Error::parse(path.display(), line, format!("unknown speaker `{}`", f[1]))
            })?;
            Ok(ConversationRecord {
                driver_id: f[0].clone(),
                speaker,
                ts: field(path, line, &f, 2, "timestamp")?,
                text: f[3].clone(),
            })
        })
        .collect()
}

pub fn write_drivers(path: &Path, drivers: &[DriverRecord]) -> Result<()> {
    let mut out =
        format!("{DRIVERS_HEADER}\n# driver_id\tage\tsignup_ts\tsignup_city\tfirst_trip_ts\n");
    for d in drivers {
        let trip = d
            .first_trip_ts
            .map_or_else(|| "-".to_owned(), |t| t.to_string());
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            escape(&d.driver_id),
            d.age,
            d.signup_ts,
            escape(&d.signup_city),
            trip
        );
    }
    write_file(path, &out)
}

pub fn read_drivers(path: &Path) -> Result<Vec<DriverRecord>> {
    records(path, DRIVERS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            expect_fields(path, line, &f, 5)?;
            let first_trip_ts = if f[4] == "-" {
                None
            } else {
                Some(field(path, line, &f, 4, "first_trip_ts")?)
            };
            Ok(DriverRecord {
                driver_id: f[0].clone(),
                age: field(path, line, &f, 1, "age")?,
                signup_ts: field(path, line, &f, 2, "signup_ts")?,
                signup_city: f[3].clone(),
                first_trip_ts,
            })
        })
        .collect()
}

const PAIR_COLUMNS: &str = "driver_id\tdriver_ts\tdriver_text\tagent_ts\tagent_text\tresponded_24h\tfirst_trip_7d\tdriver_age\tdays_since_signup\tnum_prior_driver_msgs\tsignup_city";

pub fn write_pairs(path: &Path, pairs: &[MessagePair]) -> Result<()> {
    let mut out = format!("{PAIRS_HEADER}\n# {PAIR_COLUMNS}\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            escape(&p.driver_id),
            p.driver_msg.timestamp,
            escape(&p.driver_msg.raw_text),
            p.agent_msg.timestamp,
            escape(&p.agent_msg.raw_text),
            u8::from(p.responded_24h),
            u8::from(p.first_trip_7d),
            p.driver_age,
            p.days_since_signup,
            p.num_prior_driver_msgs,
            escape(&p.signup_city),
        );
    }
    write_file(path, &out)
}

/// Reads a pair file; tokens are re-derived with `redactor`.
pub fn read_pairs(path: &Path, redactor: &Redactor) -> Result<Vec<MessagePair>> {
    records(path, PAIRS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            expect_fields(path, line, &f, 11)?;
            let driver_ts: i64 = field(path, line, &f, 1, "driver_ts")?;
            let agent_ts: i64 = field(path, line, &f, 3, "agent_ts")?;
            let delay = agent_ts - driver_ts;
            if !(delay > 0 && delay <= super::DEFAULT_PAIR_WINDOW_S) {
                return Err(Error::parse(
                    path.display(),
                    line,
                    format!("agent reply delay {delay}s is outside (0, 3600]"),
                ));
            }
            let days: f64 = field(path, line, &f, 8, "days_since_signup")?;
            if !(days >= 0.0) {
                return Err(Error::parse(
                    path.display(),
                    line,
                    "days_since_signup must be >= 0",
                ));
            }
            Ok(MessagePair {
                driver_id: f[0].clone(),
                driver_msg: Utterance::new(f[2].clone(), Speaker::Driver, driver_ts, redactor),
                agent_msg: Utterance::new(f[4].clone(), Speaker::Agent, agent_ts, redactor),
                responded_24h: bool01(path, line, &f[5], "responded_24h")?,
                first_trip_7d: bool01(path, line, &f[6], "first_trip_7d")?,
                driver_age: field(path, line, &f, 7, "driver_age")?,
                days_since_signup: days,
                num_prior_driver_msgs: field(path, line, &f, 9, "num_prior_driver_msgs")?,
                signup_city: f[10].clone(),
            })
        })
        .collect()
}

/// Builds message pairs from raw conversations and driver attributes.
///
/// Each driver's records are stably sorted by timestamp and paired with
/// [`pair_messages`](super::pair_messages). `responded_24h` is set when the driver wrote again
/// within 24 hours of the agent reply; `first_trip_7d` when the driver's
/// first trip falls within 7 days after it.
pub fn ingest(
    conversations: &[ConversationRecord],
    drivers: &[DriverRecord],
    redactor: &Redactor,
    window_s: i64,
) -> Result<Vec<MessagePair>> {
    let by_id: BTreeMap<&str, &DriverRecord> =
        drivers.iter().map(|d| (d.driver_id.as_str(), d)).collect();
    let mut grouped: BTreeMap<&str, Vec<&ConversationRecord>> = BTreeMap::new();
    for r in conversations {
        grouped.entry(r.driver_id.as_str()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (id, mut records) in grouped {
        let driver = by_id
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("no driver record for `{id}`")))?;
        records.sort_by_key(|r| r.ts);
        let utts: Vec<Utterance> = records
            .iter()
            .map(|r| Utterance::new(r.text.clone(), r.speaker, r.ts, redactor))
            .collect();
        let driver_times: Vec<i64> = utts
            .iter()
            .filter(|u| u.speaker == Speaker::Driver)
            .map(|u| u.timestamp)
            .collect();
        for (di, ai) in pair_indices(&utts, window_s)? {
            let d_ts = utts[di].timestamp;
            let a_ts = utts[ai].timestamp;
            if d_ts < driver.signup_ts {
                return Err(Error::InvalidInput(format!(
                    "driver `{id}` wrote at {d_ts}, before signing up at {}",
                    driver.signup_ts
                )));
            }
            let prior = utts[..di]
                .iter()
                .filter(|u| u.speaker == Speaker::Driver)
                .count();
            out.push(MessagePair {
                driver_id: id.to_owned(),
                driver_msg: utts[di].clone(),
                agent_msg: utts[ai].clone(),
                responded_24h: driver_times.iter().any(|&t| t > a_ts && t <= a_ts + DAY),
                first_trip_7d: driver
                    .first_trip_ts
                    .is_some_and(|t| t > a_ts && t <= a_ts + 7 * DAY),
                driver_age: driver.age,
                days_since_signup: (d_ts - driver.signup_ts) as f64 / DAY as f64,
                num_prior_driver_msgs: prior as u32,
                signup_city: driver.signup_city.clone(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SyntheticSpec, SYNTHETIC_NAMES};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn escaping_round_trips(s in "\\PC*|[\\\\\t\n\r a]{0,20}") {
            prop_assert_eq!(unescape(&escape(&s)).unwrap(), s);
        }
    }

    #[test]
    fn pair_file_round_trip() {
        let spec = SyntheticSpec {
            n_drivers: 8,
            pairs_per_driver: (1, 4),
            ..SyntheticSpec::default()
        };
        let corpus = generate_synthetic_corpus(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        write_pairs(&path, &corpus.pairs).unwrap();
        let redactor = Redactor::new(&SYNTHETIC_NAMES);
        assert_eq!(read_pairs(&path, &redactor).unwrap(), corpus.pairs);
    }

    #[test]
    fn ingest_reproduces_synthetic_pairs() {
        let spec = SyntheticSpec {
            n_drivers: 15,
            pairs_per_driver: (1, 6),
            ..SyntheticSpec::default()
        };
        let corpus = generate_synthetic_corpus(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let conv_path = dir.path().join("conv.tsv");
        let drivers_path = dir.path().join("drivers.tsv");
        write_conversations(&conv_path, &corpus.conversations).unwrap();
        write_drivers(&drivers_path, &corpus.drivers).unwrap();
        let redactor = Redactor::new(&SYNTHETIC_NAMES);
        let pairs = ingest(
            &read_conversations(&conv_path).unwrap(),
            &read_drivers(&drivers_path).unwrap(),
            &redactor,
            3600,
        )
        .unwrap();
        assert_eq!(pairs.len(), corpus.pairs.len());
        for (got, want) in pairs.iter().zip(&corpus.pairs) {
            let mut want = want.clone();
            // Pair-level trip outcomes only live in the pair file.
            want.first_trip_7d = false;
            assert_eq!(got, &want);
        }
    }

    #[test]
    fn bad_header_and_bad_fields_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        fs::write(&path, "#sdl-pairs v2\n").unwrap();
        assert!(matches!(
            read_pairs(&path, &Redactor::default()),
            Err(Error::Parse { line: 1, .. })
        ));
        fs::write(&path, "#sdl-corpus v1\nd1\tbot\t5\thi\n").unwrap();
        assert!(matches!(
            read_conversations(&path),
            Err(Error::Parse { line: 2, .. })
        ));
        fs::write(
            &path,
            "#sdl-pairs v1\nd1\t0\ta\t9999\tb\t0\t0\t30\t1\t0\tc\n",
        )
        .unwrap();
        assert!(read_pairs(&path, &Redactor::default()).is_err());
    }

    #[test]
    fn ingest_outcomes_from_timing() {
        let conv = vec![
            ConversationRecord {
                driver_id: "a".into(),
                speaker: Speaker::Driver,
                ts: 100,
                text: "q1".into(),
            },
            ConversationRecord {
                driver_id: "a".into(),
                speaker: Speaker::Agent,
                ts: 200,
                text: "r1".into(),
            },
            ConversationRecord {
                driver_id: "a".into(),
                speaker: Speaker::Driver,
                ts: 200 + DAY,
                text: "ok".into(),
            },
            ConversationRecord {
                driver_id: "a".into(),
                speaker: Speaker::Driver,
                ts: 300 + 3 * DAY,
                text: "q2".into(),
            },
            ConversationRecord {
                driver_id: "a".into(),
                speaker: Speaker::Agent,
                ts: 400 + 3 * DAY,
                text: "r2".into(),
            },
        ];
        let drivers = vec![DriverRecord {
            driver_id: "a".into(),
            age: 33.0,
            signup_ts: 0,
            signup_city: "x".into(),
            first_trip_ts: Some(500 + 8 * DAY),
        }];
        let pairs = ingest(&conv, &drivers, &Redactor::default(), 3600).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs[0].responded_24h && !pairs[0].first_trip_7d);
        assert_eq!(pairs[0].num_prior_driver_msgs, 0);
        assert!(!pairs[1].responded_24h && pairs[1].first_trip_7d);
        assert_eq!(pairs[1].num_prior_driver_msgs, 2);
    }
}
