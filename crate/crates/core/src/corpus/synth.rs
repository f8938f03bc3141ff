//! Seeded template generator standing in for a real onboarding-support corpus.
//!
//! Drivers ask about one of four onboarding topics; agents answer with a
//! topic-specific core reply that optional politeness and positivity markers
//! wrap. Engagement outcomes come from a clipped linear-probability model
//! over standardized covariates plus a per-driver random intercept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::{ConversationRecord, DriverRecord};
use super::{MessagePair, Redactor, Speaker, Utterance};
use crate::{Error, Result};

pub const SYNTHETIC_NAMES: [&str; 12] = [
    "Maria", "James", "Aisha", "Carlos", "Mei", "Tom", "Priya", "Luca", "Fatima", "Omar", "Sofia",
    "Ivan",
];

const CITIES: [&str; 5] = ["city0", "city1", "city2", "city3", "city4"];
const DAY: i64 = 86_400;
const EPOCH_BASE: i64 = 1_700_000_000;
const PROBABILITY_FLOOR: f64 = 0.02;
const PROBABILITY_CEIL: f64 = 0.98;

/// Coefficients of one engagement outcome, applied to standardized covariates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub intercept: f64,
    pub driver_age: f64,
    pub days_since_signup: f64,
    pub num_driver_msgs: f64,
    pub msg_length: f64,
    pub politeness: f64,
    pub positivity: f64,
    /// Standard deviation of the per-driver random intercept.
    pub driver_effect_sd: f64,
}

impl OutcomeModel {
    /// Driver-response coefficients with the signs and magnitudes of the
    /// all-messages model.
    pub fn responsiveness() -> Self {
        Self {
            intercept: 0.45,
            driver_age: 0.016,
            days_since_signup: -0.105,
            num_driver_msgs: 0.068,
            msg_length: -0.041,
            politeness: 0.038,
            positivity: -0.047,
            driver_effect_sd: 0.05,
        }
    }

    pub fn first_trip() -> Self {
        Self {
            intercept: 0.30,
            driver_age: -0.001,
            days_since_signup: 0.104,
            num_driver_msgs: 0.053,
            msg_length: 0.010,
            politeness: 0.001,
            positivity: 0.001,
            driver_effect_sd: 0.05,
        }
    }

    fn linear(&self, z: &[f64; 6]) -> f64 {
        self.intercept
            + self.driver_age * z[0]
            + self.days_since_signup * z[1]
            + self.num_driver_msgs * z[2]
            + self.msg_length * z[3]
            + self.politeness * z[4]
            + self.positivity * z[5]
    }

    fn coefficients(&self) -> [f64; 7] {
        [
            self.intercept,
            self.driver_age,
            self.days_since_signup,
            self.num_driver_msgs,
            self.msg_length,
            self.politeness,
            self.positivity,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_drivers: usize,
    /// Inclusive range of pairs generated per driver.
    pub pairs_per_driver: (usize, usize),
    pub politeness_marker_rate: f64,
    pub positivity_marker_rate: f64,
    /// Share of replies replaced by a congratulatory milestone template.
    pub milestone_rate: f64,
    pub responded: OutcomeModel,
    pub first_trip: OutcomeModel,
    pub rng_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_drivers: 300,
            pairs_per_driver: (6, 12),
            politeness_marker_rate: 0.5,
            positivity_marker_rate: 0.5,
            milestone_rate: 0.03,
            responded: OutcomeModel::responsiveness(),
            first_trip: OutcomeModel::first_trip(),
            rng_seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("politeness_marker_rate", self.politeness_marker_rate),
            ("positivity_marker_rate", self.positivity_marker_rate),
            ("milestone_rate", self.milestone_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        let (lo, hi) = self.pairs_per_driver;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidInput(format!(
                "pairs_per_driver range ({lo}, {hi}) is empty or includes zero"
            )));
        }
        for m in [&self.responded, &self.first_trip] {
            if m.coefficients().iter().any(|c| !c.is_finite())
                || !(m.driver_effect_sd.is_finite() && m.driver_effect_sd >= 0.0)
            {
                return Err(Error::InvalidInput(
                    "engagement coefficients must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which markers a generated reply carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerCounts {
    pub greeting: bool,
    pub apology: bool,
    pub please: bool,
    pub gratitude: bool,
    pub great_news: bool,
    pub exciting: bool,
    pub good_luck: bool,
    pub milestone: bool,
}

impl MarkerCounts {
    pub fn politeness(&self) -> usize {
        [self.greeting, self.apology, self.please, self.gratitude]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn positivity(&self) -> usize {
        [self.great_news, self.exciting, self.good_luck]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

/// Supplies the politeness and positivity covariates that drive outcomes.
pub trait ReplyCovariates {
    fn politeness(&self, reply: &Utterance) -> f64;
    fn positivity(&self, reply: &Utterance) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub pairs: Vec<MessagePair>,
    pub markers: Vec<MarkerCounts>,
    pub conversations: Vec<ConversationRecord>,
    pub drivers: Vec<DriverRecord>,
}

/// Generates a corpus whose outcome model uses the marker counts themselves
/// as the politeness and positivity covariates.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    generate(spec, None)
}

/// Like [`generate_synthetic_corpus`], but the outcome model sees the
/// covariates computed by `scorer` on each reply, so a regression using the
/// same scorer observes exactly the generating covariates.
pub fn generate_synthetic_corpus_with(
    spec: &SyntheticSpec,
    scorer: &dyn ReplyCovariates,
) -> Result<SyntheticCorpus> {
    generate(spec, Some(scorer))
}

#[derive(Debug, Clone, Copy)]
enum Topic {
    Documents,
    BackgroundCheck,
    Inspection,
    FirstTrip,
}

const TOPICS: [Topic; 4] = [
    Topic::Documents,
    Topic::BackgroundCheck,
    Topic::Inspection,
    Topic::FirstTrip,
];

const DOCS: [&str; 3] = ["license", "insurance", "registration"];
const VEHICLES: [&str; 3] = ["car", "suv", "minivan"];

fn question(topic: Topic, variant: usize, slot: usize) -> String {
    match topic {
        Topic::Documents => {
            let doc = DOCS[slot];
            match variant {
                0 => format!("How do I upload my {doc}?"),
                1 => format!("The app will not accept my {doc} photo"),
                _ => format!("Where should I send my {doc}?"),
            }
        }
        Topic::BackgroundCheck => match variant {
            0 => "How long does the background check take?".into(),
            1 => "Is my background check done yet?".into(),
            _ => "Any update on my background check?".into(),
        },
        Topic::Inspection => {
            let veh = VEHICLES[slot];
            match variant {
                0 => format!("Where can I get my {veh} inspected?"),
                1 => format!("Does my {veh} need a vehicle inspection?"),
                _ => format!("I lost the inspection form for my {veh}"),
            }
        }
        Topic::FirstTrip => match variant {
            0 => "How do I go online for my first trip?".into(),
            1 => "When can I start driving?".into(),
            _ => "I am ready for my first trip".into(),
        },
    }
}

/// (information sentence, requested action) for a topic and reply variant.
fn core_reply(topic: Topic, variant: usize, slot: usize) -> (String, String) {
    match (topic, variant) {
        (Topic::Documents, 0) => (
            format!(
                "You can add your {} from the documents page in the partner app.",
                DOCS[slot]
            ),
            format!("upload a photo of your {} there", DOCS[slot]),
        ),
        (Topic::Documents, _) => (
            format!(
                "The photo of your {} must show all four corners.",
                DOCS[slot]
            ),
            format!("take a new photo of your {} with the flash on", DOCS[slot]),
        ),
        (Topic::BackgroundCheck, 0) => (
            "The background check usually takes 3 to 5 business days.".into(),
            "check the app for status updates".into(),
        ),
        (Topic::BackgroundCheck, _) => (
            "Your background check is still in review.".into(),
            "confirm the details you entered in the app".into(),
        ),
        (Topic::Inspection, 0) => (
            format!(
                "You can get your {} inspected at any partner hub.",
                VEHICLES[slot]
            ),
            "bring the inspection form to the hub".into(),
        ),
        (Topic::Inspection, _) => (
            format!(
                "Every {} needs an inspection before the first trip.",
                VEHICLES[slot]
            ),
            "print a new inspection form from the app".into(),
        ),
        (Topic::FirstTrip, 0) => (
            "You can go online as soon as your account is set up.".into(),
            "open the driver app and tap go".into(),
        ),
        (Topic::FirstTrip, _) => (
            "Your account is set up now.".into(),
            "update the driver app before your first trip".into(),
        ),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one draw per call keeps the stream layout simple.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn driver_text<R: Rng>(rng: &mut R, topic: Topic, variant: usize, slot: usize) -> String {
    let mut text = question(topic, variant, slot);
    if rng.gen_bool(0.10) {
        text = format!("Hi, this is {}. {text}", pick(rng, &SYNTHETIC_NAMES));
    }
    if rng.gen_bool(0.05) {
        let name = pick(rng, &SYNTHETIC_NAMES).to_lowercase();
        text.push_str(&format!(
            " My email is {name}{}@mail.com",
            rng.gen_range(10..100)
        ));
    }
    if rng.gen_bool(0.05) {
        text.push_str(&format!(" Call me at 555 {:04}", rng.gen_range(0..10_000)));
    }
    text
}

fn agent_text<R: Rng>(
    rng: &mut R,
    spec: &SyntheticSpec,
    topic: Topic,
    variant: usize,
    slot: usize,
) -> (String, MarkerCounts) {
    let mut m = MarkerCounts::default();
    if rng.gen_bool(spec.milestone_rate) {
        m.milestone = true;
        let text = format!(
            "Hi {}, this is {} from the partner team. Congrats - your background check is complete!",
            pick(rng, &SYNTHETIC_NAMES),
            pick(rng, &SYNTHETIC_NAMES)
        );
        return (text, m);
    }
    let pol = spec.politeness_marker_rate;
    let pos = spec.positivity_marker_rate;
    m.greeting = rng.gen_bool(pol);
    m.apology = rng.gen_bool(pol);
    m.please = rng.gen_bool(pol);
    m.gratitude = rng.gen_bool(pol);
    m.great_news = rng.gen_bool(pos);
    m.exciting = rng.gen_bool(pos);
    m.good_luck = rng.gen_bool(pos);
    let name = pick(rng, &SYNTHETIC_NAMES);

    let (info, action) = core_reply(topic, variant % 2, slot);
    let mut parts: Vec<String> = Vec::new();
    if m.greeting {
        parts.push(format!("Hi {name},"));
    }
    if m.great_news {
        parts.push("great news!".into());
    }
    if m.apology {
        parts.push("Sorry for the wait.".into());
    }
    parts.push(info);
    if m.please {
        parts.push(format!("Could you please {action}?"));
    } else {
        parts.push(format!("{}.", capitalize(&action)));
    }
    if m.exciting {
        parts.push("This is exciting!".into());
    }
    if m.good_luck {
        parts.push("Good luck!".into());
    }
    if m.gratitude {
        parts.push("Thank you so much.".into());
    }
    let mut text = parts.join(" ");
    text = capitalize(&text);
    (text, m)
}

const FOLLOW_UPS: [&str; 4] = ["ok thanks", "got it", "will do", "ok"];

struct Draft {
    driver_idx: usize,
    driver_ts: i64,
    agent_ts: i64,
    driver_text: String,
    agent_text: String,
    markers: MarkerCounts,
    days_since_signup: f64,
    agent: Utterance,
}

struct DriverDraft {
    id: String,
    age: f64,
    city: &'static str,
    signup_ts: i64,
    responded_effect: f64,
    trip_effect: f64,
}

fn moments(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

fn generate(spec: &SyntheticSpec, scorer: Option<&dyn ReplyCovariates>) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let redactor = Redactor::new(&SYNTHETIC_NAMES);

    // Texts, schedule and reply covariates do not depend on outcomes.
    let mut drivers = Vec::with_capacity(spec.n_drivers);
    let mut drafts: Vec<Draft> = Vec::new();
    for d in 0..spec.n_drivers {
        let driver = DriverDraft {
            id: format!("d{d:05}"),
            age: rng.gen_range(21..=65) as f64,
            city: CITIES[rng.gen_range(0..CITIES.len())],
            signup_ts: EPOCH_BASE + rng.gen_range(0..90 * DAY),
            responded_effect: spec.responded.driver_effect_sd * standard_normal(&mut rng),
            trip_effect: spec.first_trip.driver_effect_sd * standard_normal(&mut rng),
        };
        let n_pairs = rng.gen_range(spec.pairs_per_driver.0..=spec.pairs_per_driver.1);
        let first_offset_days = (1.5 + standard_normal(&mut rng)).exp();
        let mut ts = driver.signup_ts + (first_offset_days * DAY as f64) as i64;
        for _ in 0..n_pairs {
            let topic = TOPICS[rng.gen_range(0..TOPICS.len())];
            let variant = rng.gen_range(0..3);
            let slot = rng.gen_range(0..3);
            let driver_text = driver_text(&mut rng, topic, variant, slot);
            let (agent_text, markers) = agent_text(&mut rng, spec, topic, variant, slot);
            let agent_ts = ts + rng.gen_range(60..=3300);
            let agent = Utterance::new(agent_text.clone(), Speaker::Agent, agent_ts, &redactor);
            drafts.push(Draft {
                driver_idx: d,
                driver_ts: ts,
                agent_ts,
                driver_text,
                agent_text,
                markers,
                days_since_signup: (ts - driver.signup_ts) as f64 / DAY as f64,
                agent,
            });
            ts += rng.gen_range((3 * DAY / 2)..(12 * DAY));
        }
        drivers.push(driver);
    }

    let politeness: Vec<f64> = drafts
        .iter()
        .map(|d| match scorer {
            Some(s) => s.politeness(&d.agent),
            None => d.markers.politeness() as f64,
        })
        .collect();
    let positivity: Vec<f64> = drafts
        .iter()
        .map(|d| match scorer {
            Some(s) => s.positivity(&d.agent),
            None => d.markers.positivity() as f64,
        })
        .collect();
    let age_m = moments(drafts.iter().map(|d| drivers[d.driver_idx].age));
    let days_m = moments(drafts.iter().map(|d| d.days_since_signup.ln_1p()));
    let len_m = moments(drafts.iter().map(|d| d.agent_text.chars().count() as f64));
    let pol_m = moments(politeness.iter().copied());
    let pos_m = moments(positivity.iter().copied());
    // The prior-message count depends on earlier outcomes; its moments are
    // approximated by the inquiry index.
    let mut index_in_driver = Vec::with_capacity(drafts.len());
    let mut last = usize::MAX;
    let mut k = 0.0;
    for d in &drafts {
        if d.driver_idx != last {
            k = 0.0;
            last = d.driver_idx;
        }
        index_in_driver.push(k);
        k += 1.0;
    }
    let msgs_m = moments(index_in_driver.iter().map(|k: &f64| (k * 1.5).ln_1p()));
    let z = |x: f64, (m, s): (f64, f64)| (x - m) / s;

    let mut pairs = Vec::with_capacity(drafts.len());
    let mut markers = Vec::with_capacity(drafts.len());
    let mut conversations = Vec::new();
    let mut prior_msgs = 0u32;
    let mut last = usize::MAX;
    for (i, draft) in drafts.into_iter().enumerate() {
        let driver = &drivers[draft.driver_idx];
        if draft.driver_idx != last {
            prior_msgs = 0;
            last = draft.driver_idx;
        }
        let covariates = [
            z(driver.age, age_m),
            z(draft.days_since_signup.ln_1p(), days_m),
            z((prior_msgs as f64).ln_1p(), msgs_m),
            z(draft.agent_text.chars().count() as f64, len_m),
            z(politeness[i], pol_m),
            z(positivity[i], pos_m),
        ];
        let p_resp = (spec.responded.linear(&covariates) + driver.responded_effect)
            .clamp(PROBABILITY_FLOOR, PROBABILITY_CEIL);
        let p_trip = (spec.first_trip.linear(&covariates) + driver.trip_effect)
            .clamp(PROBABILITY_FLOOR, PROBABILITY_CEIL);
        let responded = rng.gen_bool(p_resp);
        let first_trip = rng.gen_bool(p_trip);

        conversations.push(ConversationRecord {
            driver_id: driver.id.clone(),
            speaker: Speaker::Driver,
            ts: draft.driver_ts,
            text: draft.driver_text.clone(),
        });
        conversations.push(ConversationRecord {
            driver_id: driver.id.clone(),
            speaker: Speaker::Agent,
            ts: draft.agent_ts,
            text: draft.agent_text.clone(),
        });
        if responded {
            conversations.push(ConversationRecord {
                driver_id: driver.id.clone(),
                speaker: Speaker::Driver,
                ts: draft.agent_ts + rng.gen_range(600..20 * 3600),
                text: pick(&mut rng, &FOLLOW_UPS).to_owned(),
            });
        }

        pairs.push(MessagePair {
            driver_id: driver.id.clone(),
            driver_msg: Utterance::new(
                draft.driver_text,
                Speaker::Driver,
                draft.driver_ts,
                &redactor,
            ),
            agent_msg: draft.agent,
            responded_24h: responded,
            first_trip_7d: first_trip,
            driver_age: driver.age,
            days_since_signup: draft.days_since_signup,
            num_prior_driver_msgs: prior_msgs,
            signup_city: driver.city.to_owned(),
        });
        markers.push(draft.markers);
        prior_msgs += 1 + u32::from(responded);
    }

    let drivers = drivers
        .into_iter()
        .map(|d| DriverRecord {
            driver_id: d.id,
            age: d.age,
            signup_ts: d.signup_ts,
            signup_city: d.city.to_owned(),
            first_trip_ts: None,
        })
        .collect();
    Ok(SyntheticCorpus {
        pairs,
        markers,
        conversations,
        drivers,
    })
}
