//! Strategy-count features and an L2-regularized logistic politeness model.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::strategies::{detect_strategies, Strategy, NUM_STRATEGIES};
use crate::corpus::{Redactor, Speaker, Utterance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolitenessFeatures {
    pub strategy_counts: [u32; NUM_STRATEGIES],
    pub length_tokens: usize,
}

impl PolitenessFeatures {
    pub fn count(&self, strategy: Strategy) -> u32 {
        self.strategy_counts[strategy.index()]
    }
}

pub fn featurize_tokens(tokens: &[String]) -> PolitenessFeatures {
    let mut strategy_counts = [0; NUM_STRATEGIES];
    for hit in detect_strategies(tokens) {
        strategy_counts[hit.strategy.index()] += 1;
    }
    PolitenessFeatures {
        strategy_counts,
        length_tokens: tokens.len(),
    }
}

pub fn featurize_politeness(utterance: &Utterance) -> PolitenessFeatures {
    featurize_tokens(&utterance.tokens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolitenessModel {
    pub weights: [f64; NUM_STRATEGIES],
    pub bias: f64,
    /// Short SHA-256 digest of the training texts and labels.
    pub corpus_id: String,
    pub seed: u64,
    pub reg: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl PolitenessModel {
    pub fn linear_response(&self, features: &PolitenessFeatures) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(features.strategy_counts)
                .map(|(w, c)| w * f64::from(c))
                .sum::<f64>()
    }

    pub fn score_features(&self, features: &PolitenessFeatures) -> f64 {
        sigmoid(self.linear_response(features))
    }

    pub fn weight(&self, strategy: Strategy) -> f64 {
        self.weights[strategy.index()]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("#sdl-politeness-model v1\n");
        let hex = |x: f64| format!("{:016x}", x.to_bits());
        let _ = writeln!(out, "corpus_id\t{}", self.corpus_id);
        let _ = writeln!(out, "seed\t{}", self.seed);
        let _ = writeln!(out, "reg\t{}\t# {}", hex(self.reg), self.reg);
        let _ = writeln!(out, "bias\t{}\t# {}", hex(self.bias), self.bias);
        for s in Strategy::ALL {
            let w = self.weights[s.index()];
            let _ = writeln!(out, "w.{}\t{}\t# {}", s.name(), hex(w), w);
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "#sdl-politeness-model v1")) => {}
            _ => {
                return Err(Error::parse(
                    origin,
                    1,
                    "missing `#sdl-politeness-model v1` header",
                ))
            }
        }
        let mut corpus_id = None;
        let mut seed = None;
        let mut reg = None;
        let mut bias = None;
        let mut weights = [None; NUM_STRATEGIES];
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let value = fields
                .get(1)
                .ok_or_else(|| Error::parse(origin, lineno, "expected key<TAB>value"))?;
            let bits = || {
                u64::from_str_radix(value, 16)
                    .map(f64::from_bits)
                    .map_err(|e| Error::parse(origin, lineno, format!("bad float bits: {e}")))
            };
            match fields[0] {
                "corpus_id" => corpus_id = Some((*value).to_owned()),
                "seed" => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|e| Error::parse(origin, lineno, format!("bad seed: {e}")))?,
                    )
                }
                "reg" => reg = Some(bits()?),
                "bias" => bias = Some(bits()?),
                key => {
                    let strategy = key
                        .strip_prefix("w.")
                        .and_then(Strategy::from_name)
                        .ok_or_else(|| {
                            Error::parse(origin, lineno, format!("unknown key `{key}`"))
                        })?;
                    weights[strategy.index()] = Some(bits()?);
                }
            }
        }
        let missing = |what: &str| Error::parse(origin, 0, format!("missing `{what}`"));
        let mut w = [0.0; NUM_STRATEGIES];
        for s in Strategy::ALL {
            w[s.index()] = weights[s.index()].ok_or_else(|| missing(s.name()))?;
        }
        let model = Self {
            weights: w,
            bias: bias.ok_or_else(|| missing("bias"))?,
            corpus_id: corpus_id.ok_or_else(|| missing("corpus_id"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            reg: reg.ok_or_else(|| missing("reg"))?,
        };
        if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::parse(origin, 0, "non-finite weight"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

pub fn score_politeness(model: &PolitenessModel, utterance: &Utterance) -> f64 {
    model.score_features(&featurize_politeness(utterance))
}

const MAX_NEWTON_ITERS: usize = 100;
const GRAD_TOL: f64 = 1e-12;

struct Problem {
    x: DMatrix<f64>,
    y: DVector<f64>,
    reg: f64,
}

impl Problem {
    /// Parameter layout: 21 weights, then the unregularized bias.
    fn loss(&self, theta: &DVector<f64>) -> f64 {
        let z = &self.x * theta;
        let n = self.y.len() as f64;
        let data: f64 = z
            .iter()
            .zip(self.y.iter())
            .map(|(&z, &y)| softplus(z) - y * z)
            .sum();
        let w = theta.rows(0, NUM_STRATEGIES);
        data / n + 0.5 * self.reg * w.norm_squared()
    }

    fn gradient_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.y.len() as f64;
        let p = (&self.x * theta).map(sigmoid);
        let r = &p - &self.y;
        let mut grad = self.x.transpose() * r / n;
        let weights = p.map(|p| p * (1.0 - p) / n);
        let mut xw = self.x.clone();
        for (mut row, w) in xw.row_iter_mut().zip(weights.iter()) {
            row *= *w;
        }
        let mut hess = self.x.transpose() * xw;
        for j in 0..NUM_STRATEGIES {
            grad[j] += self.reg * theta[j];
            hess[(j, j)] += self.reg;
        }
        (grad, hess)
    }
}

/// Trains and also returns the objective after every accepted step
/// (the first entry is the objective at zero).
pub fn train_politeness_traced(
    labeled: &[(Utterance, f64)],
    reg: f64,
    seed: u64,
) -> Result<(PolitenessModel, Vec<f64>)> {
    if !(reg > 0.0 && reg.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "regularization must be positive, got {reg}"
        )));
    }
    if let Some((_, y)) = labeled.iter().find(|(_, y)| !(0.0..=1.0).contains(y)) {
        return Err(Error::InvalidInput(format!("label {y} outside [0, 1]")));
    }
    let first = labeled.first().map(|(_, y)| *y);
    if labeled.iter().all(|(_, y)| Some(*y) == first) {
        return Err(Error::Training(
            "need at least two distinct labels to train a politeness model".into(),
        ));
    }
    let n = labeled.len();
    let dim = NUM_STRATEGIES + 1;
    let mut x = DMatrix::zeros(n, dim);
    let mut hasher = Sha256::new();
    for (i, (utt, y)) in labeled.iter().enumerate() {
        let f = featurize_politeness(utt);
        for (j, c) in f.strategy_counts.iter().enumerate() {
            x[(i, j)] = f64::from(*c);
        }
        x[(i, NUM_STRATEGIES)] = 1.0;
        hasher.update(utt.tokens.join(" ").as_bytes());
        hasher.update(y.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let corpus_id: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    let problem = Problem {
        x,
        y: DVector::from_iterator(n, labeled.iter().map(|(_, y)| *y)),
        reg,
    };

    // Zero start; the objective is strictly convex so the optimum does not
    // depend on the seed, which is kept as metadata.
    let mut theta = DVector::zeros(dim);
    let mut loss = problem.loss(&theta);
    let mut trace = vec![loss];
    for _ in 0..MAX_NEWTON_ITERS {
        let (grad, hess) = problem.gradient_hessian(&theta);
        if grad.amax() < GRAD_TOL {
            break;
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => hess
                .lu()
                .solve(&grad)
                .ok_or_else(|| Error::Training("singular Hessian".into()))?,
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &theta - &step * t;
            let l = problem.loss(&candidate);
            if l < loss {
                accepted = Some((candidate, l));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((candidate, l)) => {
                theta = candidate;
                loss = l;
                trace.push(loss);
            }
            // No representable decrease left.
            None => break,
        }
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("non-finite weights".into()));
    }
    let mut weights = [0.0; NUM_STRATEGIES];
    weights.copy_from_slice(theta.rows(0, NUM_STRATEGIES).as_slice());
    Ok((
        PolitenessModel {
            weights,
            bias: theta[NUM_STRATEGIES],
            corpus_id,
            seed,
            reg,
        },
        trace,
    ))
}

/// Full-batch Newton fit of mean log loss plus `reg / 2 * |w|^2`; the bias is
/// not penalized. Deterministic for a given input.
pub fn train_politeness(
    labeled: &[(Utterance, f64)],
    reg: f64,
    seed: u64,
) -> Result<PolitenessModel> {
    train_politeness_traced(labeled, reg, seed).map(|(m, _)| m)
}

/// Reads the request-corpus CSV format: a `Request` column with the text and
/// a `Normalized Score` column.
pub fn load_request_corpus(path: &Path) -> Result<Vec<(String, f64)>> {
    let origin = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(&origin, e))?;
    let headers = reader.headers().map_err(|e| csv_error(&origin, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::parse(&origin, 1, format!("missing `{name}` column")))
    };
    let text_col = column("Request")?;
    let score_col = column("Normalized Score")?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(&origin, e))?;
        let line = i + 2;
        let text = record
            .get(text_col)
            .ok_or_else(|| Error::parse(&origin, line, "short record"))?;
        let score: f64 = record
            .get(score_col)
            .ok_or_else(|| Error::parse(&origin, line, "short record"))?
            .trim()
            .parse()
            .map_err(|e| Error::parse(&origin, line, format!("bad score: {e}")))?;
        out.push((text.to_owned(), score));
    }
    Ok(out)
}

fn csv_error(origin: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(origin, line, e.to_string())
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Scores at or above the upper quartile become 1, at or below the lower
/// quartile 0; the middle half is dropped.
pub fn quartile_labels(scored: &[(String, f64)]) -> Vec<(String, f64)> {
    if scored.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    scored
        .iter()
        .filter_map(|(t, s)| {
            if *s >= q3 {
                Some((t.clone(), 1.0))
            } else if *s <= q1 {
                Some((t.clone(), 0.0))
            } else {
                None
            }
        })
        .collect()
}

const BUNDLED_FIXTURE: &str = include_str!("../../data/politeness_fixture.tsv");

/// Parses `label<TAB>text` lines under a `#sdl-politeness-labels v1` header.
pub fn parse_labeled_fixture(text: &str, origin: &str) -> Result<Vec<(String, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "#sdl-politeness-labels v1")) => {}
        _ => {
            return Err(Error::parse(
                origin,
                1,
                "missing `#sdl-politeness-labels v1` header",
            ))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, i + 1, "expected label<TAB>text"))?;
        let label: f64 = label
            .parse()
            .map_err(|e| Error::parse(origin, i + 1, format!("bad label: {e}")))?;
        if !(0.0..=1.0).contains(&label) {
            return Err(Error::parse(origin, i + 1, "label outside [0, 1]"));
        }
        out.push((text.to_owned(), label));
    }
    Ok(out)
}

pub fn load_labeled_fixture(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labeled_fixture(&text, &path.display().to_string())
}

/// The labeled requests shipped with the crate.
pub fn bundled_fixture() -> Vec<(String, f64)> {
    parse_labeled_fixture(BUNDLED_FIXTURE, "politeness_fixture.tsv")
        .expect("bundled fixture parses")
}

pub fn labeled_utterances(items: &[(String, f64)], redactor: &Redactor) -> Vec<(Utterance, f64)> {
    items
        .iter()
        .map(|(t, y)| (Utterance::new(t.as_str(), Speaker::Agent, 0, redactor), *y))
        .collect()
}
