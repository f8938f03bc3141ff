use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MessagePair;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || !(self.train > 0.0) {
            return Err(Error::InvalidInput(format!(
                "split ratios must be non-negative with a positive train share: {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "split ratios sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<MessagePair>,
    pub validation: Vec<MessagePair>,
    pub test: Vec<MessagePair>,
}

impl DatasetSplit {
    pub fn parts(&self) -> [&[MessagePair]; 3] {
        [&self.train, &self.validation, &self.test]
    }

    pub fn fingerprint(&self) -> String {
        split_fingerprint(self)
    }
}

/// Assigns whole drivers to train/validation/test.
///
/// Drivers are sorted by id, shuffled with `seed`, then each goes to the part
/// whose pair count is furthest below its target (ties go to the earlier
/// part). Every part ends within one driver's worth of pairs of its target;
/// a zero ratio leaves its part empty.
pub fn split_dataset(
    pairs: &[MessagePair],
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit> {
    ratios.validate()?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pairs {
        *counts.entry(p.driver_id.as_str()).or_default() += 1;
    }
    if counts.len() < 3 {
        return Err(Error::Split(format!(
            "need at least 3 drivers, found {}",
            counts.len()
        )));
    }
    let mut drivers: Vec<(&str, usize)> = counts.into_iter().collect();
    drivers.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let total = pairs.len() as f64;
    let targets = [
        ratios.train * total,
        ratios.validation * total,
        ratios.test * total,
    ];
    let mut filled = [0usize; 3];
    let mut part_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, n) in drivers {
        let mut best = 0;
        for k in 1..3 {
            if targets[k] > 0.0
                && targets[k] - filled[k] as f64 > targets[best] - filled[best] as f64
            {
                best = k;
            }
        }
        filled[best] += n;
        part_of.insert(id, best);
    }

    let mut split = DatasetSplit::default();
    for p in pairs {
        let part = match part_of[p.driver_id.as_str()] {
            0 => &mut split.train,
            1 => &mut split.validation,
            _ => &mut split.test,
        };
        part.push(p.clone());
    }
    Ok(split)
}

/// SHA-256 over the driver ids and pair counts of each part.
pub fn split_fingerprint(split: &DatasetSplit) -> String {
    let mut hasher = Sha256::new();
    for (name, part) in ["train", "validation", "test"].iter().zip(split.parts()) {
        let ids: BTreeSet<&str> = part.iter().map(|p| p.driver_id.as_str()).collect();
        hasher.update(format!("{name}:{}:", part.len()).as_bytes());
        for id in ids {
            hasher.update(id.as_bytes());
            hasher.update(b"\n");
        }
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
