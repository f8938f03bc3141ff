use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    None,
    /// Orders with no clipped match use (0 + 1) / (total + 1).
    AddOneForZeroCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_n: usize,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            smoothing: Smoothing::None,
        }
    }
}

/// Pooled clipped matches and candidate n-gram totals, indexed by `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NgramStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub candidate_len: u64,
    pub reference_len: u64,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

pub fn ngram_stats<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<S>],
    max_n: usize,
) -> NgramStats {
    let mut stats = NgramStats {
        matches: vec![0; max_n],
        totals: vec![0; max_n],
        ..NgramStats::default()
    };
    for (cand, reference) in candidates.iter().zip(references) {
        stats.candidate_len += cand.len() as u64;
        stats.reference_len += reference.len() as u64;
        for n in 1..=max_n {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(cand, n) {
                stats.totals[n - 1] += count;
                stats.matches[n - 1] += count.min(ref_counts.get(&gram).copied().unwrap_or(0));
            }
        }
    }
    stats
}

/// Corpus-level BLEU in [0, 100] with one reference per candidate.
///
/// Orders for which the candidate corpus has no n-grams at all are left out
/// of the geometric mean (effective order). The brevity penalty is
/// `exp(min(0, 1 - r / c))`.
pub fn bleu<S: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<S>],
    config: &BleuConfig,
) -> Result<f64> {
    if config.max_n == 0 {
        return Err(Error::InvalidInput("max_n must be at least 1".into()));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("empty candidate corpus".into()));
    }
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if references.iter().any(Vec::is_empty) {
        return Err(Error::InvalidInput("references must be non-empty".into()));
    }
    let stats = ngram_stats(candidates, references, config.max_n);
    Ok(bleu_from_stats(&stats, config.smoothing))
}

pub fn bleu_from_stats(stats: &NgramStats, smoothing: Smoothing) -> f64 {
    if stats.candidate_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for (&m, &t) in stats.matches.iter().zip(&stats.totals) {
        if t == 0 {
            continue;
        }
        let p = match (m, smoothing) {
            (0, Smoothing::None) => return 0.0,
            (0, Smoothing::AddOneForZeroCounts) => 1.0 / (t as f64 + 1.0),
            _ => m as f64 / t as f64,
        };
        log_sum += p.ln();
        orders += 1;
    }
    let (c, r) = (stats.candidate_len as f64, stats.reference_len as f64);
    let bp = (1.0 - r / c).min(0.0).exp();
    100.0 * bp * (log_sum / orders as f64).exp()
}
