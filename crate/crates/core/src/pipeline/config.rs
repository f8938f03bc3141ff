use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::{SplitRatios, SyntheticSpec};
use crate::eval::{BleuConfig, CompareConfig, EnhancementConfig, Smoothing};
use crate::neural::{ModelConfig, Precision, TrainConfig, Variant, DEFAULT_MAX_LEN};
use crate::{Error, Result};

use super::manifest::sha256_hex;

/// Every parameter of a run. The file form is one `key = value` per line;
/// blank lines and lines starting with `#` are ignored.
///
/// | key | default | meaning |
/// |---|---|---|
/// | `seed` | 1 | global seed: corpus, split, initialization, shuffling |
/// | `output_dir` | `socialgen-out` | where artifacts go |
/// | `drivers` | 300 | synthetic drivers |
/// | `pairs_min`, `pairs_max` | 6, 12 | pairs per driver |
/// | `politeness_marker_rate` | 0.5 | |
/// | `positivity_marker_rate` | 0.5 | |
/// | `milestone_rate` | 0.03 | congratulatory replies |
/// | `train_ratio`, `validation_ratio`, `test_ratio` | 0.8, 0.1, 0.1 | |
/// | `min_count` | 1 | vocabulary cutoff on the train split |
/// | `d_emb`, `d_h` | 32, 64 | |
/// | `precision` | `f32` | `f32` or `f64` parameter storage |
/// | `learning_rate` | 1 | |
/// | `batch_size` | 4 | |
/// | `max_epochs` | 20 | |
/// | `patience` | 3 | |
/// | `clip_norm` | 5 | |
/// | `delta_sd` | 1 | enhancement shift in test-set SDs |
/// | `max_len` | 40 | generation length cap |
/// | `bleu_smoothing` | `none` | `none` or `add_one` |
/// | `embeddings` | empty | embedding file; empty uses the lexical model's |
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub drivers: usize,
    pub pairs_min: usize,
    pub pairs_max: usize,
    pub politeness_marker_rate: f64,
    pub positivity_marker_rate: f64,
    pub milestone_rate: f64,
    pub train_ratio: f64,
    pub validation_ratio: f64,
    pub test_ratio: f64,
    pub min_count: usize,
    pub d_emb: usize,
    pub d_h: usize,
    pub precision: Precision,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub clip_norm: f64,
    pub delta_sd: f64,
    pub max_len: usize,
    pub bleu_smoothing: Smoothing,
    pub embeddings: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SyntheticSpec::default();
        let split = SplitRatios::default();
        let model = ModelConfig::desk(Variant::Lexical);
        let train = TrainConfig::default();
        Self {
            seed: 1,
            output_dir: PathBuf::from("socialgen-out"),
            drivers: synth.n_drivers,
            pairs_min: synth.pairs_per_driver.0,
            pairs_max: synth.pairs_per_driver.1,
            politeness_marker_rate: synth.politeness_marker_rate,
            positivity_marker_rate: synth.positivity_marker_rate,
            milestone_rate: synth.milestone_rate,
            train_ratio: split.train,
            validation_ratio: split.validation,
            test_ratio: split.test,
            min_count: 1,
            d_emb: model.d_emb,
            d_h: model.d_h,
            precision: model.precision,
            learning_rate: train.learning_rate,
            batch_size: train.batch_size,
            max_epochs: train.max_epochs,
            patience: train.patience,
            clip_norm: train.clip_norm,
            delta_sd: EnhancementConfig::default().delta_sd,
            max_len: DEFAULT_MAX_LEN,
            bleu_smoothing: Smoothing::None,
            embeddings: None,
        }
    }
}

fn precision_name(p: Precision) -> &'static str {
    match p {
        Precision::F32 => "f32",
        Precision::F64 => "f64",
    }
}

fn smoothing_name(s: Smoothing) -> &'static str {
    match s {
        Smoothing::None => "none",
        Smoothing::AddOneForZeroCounts => "add_one",
    }
}

impl RunConfig {
    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_drivers: self.drivers,
            pairs_per_driver: (self.pairs_min, self.pairs_max),
            politeness_marker_rate: self.politeness_marker_rate,
            positivity_marker_rate: self.positivity_marker_rate,
            milestone_rate: self.milestone_rate,
            rng_seed: self.seed,
            ..SyntheticSpec::default()
        }
    }

    pub fn split_ratios(&self) -> SplitRatios {
        SplitRatios {
            train: self.train_ratio,
            validation: self.validation_ratio,
            test: self.test_ratio,
        }
    }

    pub fn model_config(&self, variant: Variant) -> ModelConfig {
        ModelConfig {
            variant,
            d_emb: self.d_emb,
            d_h: self.d_h,
            precision: self.precision,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            clip_norm: self.clip_norm,
            seed: self.seed,
        }
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            bleu: BleuConfig {
                smoothing: self.bleu_smoothing,
                ..BleuConfig::default()
            },
            max_len: self.max_len,
        }
    }

    pub fn enhancement_config(&self) -> EnhancementConfig {
        EnhancementConfig {
            delta_sd: self.delta_sd,
            max_len: self.max_len,
        }
    }

    /// Rejects values no stage could run with. A zero validation ratio is
    /// allowed here and refused by the train stage.
    pub fn validate(&self) -> Result<()> {
        self.synthetic_spec().validate()?;
        self.split_ratios().validate()?;
        self.train_config().validate()?;
        if self.d_emb == 0 || self.d_h == 0 {
            return Err(Error::InvalidInput("d_emb and d_h must be positive".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidInput("max_len must be positive".into()));
        }
        if !self.delta_sd.is_finite() {
            return Err(Error::InvalidInput("delta_sd must be finite".into()));
        }
        if self.drivers == 0 {
            return Err(Error::InvalidInput("drivers must be positive".into()));
        }
        Ok(())
    }

    fn entries(&self, with_output: bool) -> Vec<(&'static str, String)> {
        let mut e = vec![("seed", self.seed.to_string())];
        if with_output {
            e.push(("output_dir", self.output_dir.display().to_string()));
        }
        e.extend([
            ("drivers", self.drivers.to_string()),
            ("pairs_min", self.pairs_min.to_string()),
            ("pairs_max", self.pairs_max.to_string()),
            (
                "politeness_marker_rate",
                self.politeness_marker_rate.to_string(),
            ),
            (
                "positivity_marker_rate",
                self.positivity_marker_rate.to_string(),
            ),
            ("milestone_rate", self.milestone_rate.to_string()),
            ("train_ratio", self.train_ratio.to_string()),
            ("validation_ratio", self.validation_ratio.to_string()),
            ("test_ratio", self.test_ratio.to_string()),
            ("min_count", self.min_count.to_string()),
            ("d_emb", self.d_emb.to_string()),
            ("d_h", self.d_h.to_string()),
            ("precision", precision_name(self.precision).into()),
            ("learning_rate", self.learning_rate.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("patience", self.patience.to_string()),
            ("clip_norm", self.clip_norm.to_string()),
            ("delta_sd", self.delta_sd.to_string()),
            ("max_len", self.max_len.to_string()),
            ("bleu_smoothing", smoothing_name(self.bleu_smoothing).into()),
            (
                "embeddings",
                self.embeddings
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
        ]);
        e
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# socialgen run configuration\n");
        for (k, v) in self.entries(true) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 of every setting except `output_dir`, so the same run in two
    /// directories hashes the same.
    pub fn hash(&self) -> String {
        let mut text = String::new();
        for (k, v) in self.entries(false) {
            let _ = writeln!(text, "{k} = {v}");
        }
        sha256_hex(text.as_bytes())
    }

    /// Parses the file form on top of the defaults.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(origin, i + 1, "expected `key = value`"));
            };
            config
                .set(key.trim(), value.trim())
                .map_err(|m| Error::parse(origin, i + 1, m))?;
        }
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("invalid value `{v}` for `{key}`"))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "drivers" => self.drivers = num(key, value)?,
            "pairs_min" => self.pairs_min = num(key, value)?,
            "pairs_max" => self.pairs_max = num(key, value)?,
            "politeness_marker_rate" => self.politeness_marker_rate = num(key, value)?,
            "positivity_marker_rate" => self.positivity_marker_rate = num(key, value)?,
            "milestone_rate" => self.milestone_rate = num(key, value)?,
            "train_ratio" => self.train_ratio = num(key, value)?,
            "validation_ratio" => self.validation_ratio = num(key, value)?,
            "test_ratio" => self.test_ratio = num(key, value)?,
            "min_count" => self.min_count = num(key, value)?,
            "d_emb" => self.d_emb = num(key, value)?,
            "d_h" => self.d_h = num(key, value)?,
            "precision" => {
                self.precision = match value {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(format!("precision must be f32 or f64, found `{value}`")),
                }
            }
            "learning_rate" => self.learning_rate = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "clip_norm" => self.clip_norm = num(key, value)?,
            "delta_sd" => self.delta_sd = num(key, value)?,
            "max_len" => self.max_len = num(key, value)?,
            "bleu_smoothing" => {
                self.bleu_smoothing = match value {
                    "none" => Smoothing::None,
                    "add_one" => Smoothing::AddOneForZeroCounts,
                    _ => {
                        return Err(format!(
                            "bleu_smoothing must be none or add_one, found `{value}`"
                        ))
                    }
                }
            }
            "embeddings" => {
                self.embeddings = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text(), "mem").unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn edited_config_round_trips() {
        let mut c = RunConfig::default();
        c.seed = 77;
        c.learning_rate = 0.1 + 0.2;
        c.milestone_rate = 1.0 / 3.0;
        c.precision = Precision::F64;
        c.bleu_smoothing = Smoothing::AddOneForZeroCounts;
        c.embeddings = Some("vectors/emb.txt".into());
        c.output_dir = "some where/else".into();
        let back = RunConfig::parse(&c.to_text(), "mem").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.learning_rate.to_bits(), c.learning_rate.to_bits());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::parse("# comment\n\nseed = 9\n  d_h=16  \n", "mem").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.d_h, 16);
        assert_eq!(c.d_emb, RunConfig::default().d_emb);
    }

    #[test]
    fn bad_lines_name_the_line() {
        for text in ["seed = x", "colour = blue", "just words", "precision = f16"] {
            let err = RunConfig::parse(&format!("# c\n{text}\n"), "cfg").unwrap_err();
            match err {
                Error::Parse { line, .. } => assert_eq!(line, 2),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zero_validation_passes_config_checks() {
        let c = RunConfig {
            train_ratio: 0.9,
            validation_ratio: 0.0,
            ..RunConfig::default()
        };
        c.validate().unwrap();
        let c = RunConfig {
            max_len: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
