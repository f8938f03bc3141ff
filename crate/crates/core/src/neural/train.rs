use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Example, Params, Seq2SeqModel, Variant};
use super::vocab::PAD_ID;
use crate::corpus::{DatasetSplit, MessagePair};
use crate::social_features::{SocialScorer, SocialVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            batch_size: 4,
            max_epochs: 20,
            patience: 3,
            clip_norm: 5.0,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.batch_size > 0
            && self.max_epochs > 0
            && self.patience >= 1
            && self.clip_norm.is_finite()
            && self.clip_norm > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid training configuration: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

impl TrainingLog {
    pub fn train_curve(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }

    pub fn val_curve(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.val_loss).collect()
    }

    /// One tab-separated line per epoch.
    pub fn to_text(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tval_loss\twall_ms\n");
        for e in &self.epochs {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{}",
                e.epoch, e.train_loss, e.val_loss, e.wall_ms
            );
        }
        out
    }

    /// Reads [`to_text`](Self::to_text) output back. Losses are rounded to
    /// six decimals there; the best epoch is the first with the lowest
    /// validation loss.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut epochs = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || {
                Error::parse(
                    origin,
                    i + 1,
                    "expected epoch, train_loss, val_loss, wall_ms",
                )
            };
            if f.len() != 4 {
                return Err(bad());
            }
            epochs.push(EpochRecord {
                epoch: f[0].parse().map_err(|_| bad())?,
                train_loss: f[1].parse().map_err(|_| bad())?,
                val_loss: f[2].parse().map_err(|_| bad())?,
                wall_ms: f[3].parse().map_err(|_| bad())?,
            });
        }
        let mut log = TrainingLog {
            epochs,
            best_epoch: 0,
            best_val_loss: f64::INFINITY,
        };
        for e in &log.epochs {
            if e.val_loss < log.best_val_loss {
                log.best_val_loss = e.val_loss;
                log.best_epoch = e.epoch;
            }
        }
        if log.epochs.is_empty() {
            return Err(Error::parse(origin, 1, "training log has no epochs"));
        }
        Ok(log)
    }
}

/// Training examples for `model`; the social vector comes from scoring the
/// ground-truth agent reply (zero when no scorer is given).
pub fn make_examples(
    model: &Seq2SeqModel,
    pairs: &[MessagePair],
    scorer: Option<&SocialScorer>,
) -> Vec<Example> {
    pairs
        .iter()
        .map(|p| {
            let social =
                scorer.map_or_else(SocialVector::default, |s| s.social_vector(&p.agent_msg));
            Example::new(
                &model.vocab,
                &p.driver_msg.tokens,
                &p.agent_msg.tokens,
                social,
            )
        })
        .collect()
}

/// Trains on `split.train`, early-stopping on `split.validation`. The social
/// variant needs a scorer to derive its conditioning vectors.
pub fn train(
    model: Seq2SeqModel,
    split: &DatasetSplit,
    config: &TrainConfig,
    scorer: Option<&SocialScorer>,
) -> Result<(Seq2SeqModel, TrainingLog)> {
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::Precondition(format!(
            "training needs non-empty train and validation sets (got {} and {})",
            split.train.len(),
            split.validation.len()
        )));
    }
    let scorer = match (model.variant(), scorer) {
        (Variant::LexicalSocial, None) => {
            return Err(Error::Variant(
                "the lexical_social model needs a social scorer".into(),
            ))
        }
        (Variant::LexicalSocial, s) => s,
        (Variant::Lexical, _) => None,
    };
    let train_ex = make_examples(&model, &split.train, scorer);
    let val_ex = make_examples(&model, &split.validation, scorer);
    let mut model = model;
    model.split_fingerprint = Some(split.fingerprint());
    train_examples(model, &train_ex, &val_ex, config)
}

/// Plain minibatch SGD with global-norm clipping. Examples are reshuffled
/// each epoch from a generator seeded with `config.seed`.
pub fn train_examples(
    mut model: Seq2SeqModel,
    train: &[Example],
    validation: &[Example],
    config: &TrainConfig,
) -> Result<(Seq2SeqModel, TrainingLog)> {
    config.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Precondition(
            "training needs non-empty train and validation sets".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainingLog {
        best_val_loss: f64::INFINITY,
        ..TrainingLog::default()
    };
    let mut best_params = model.params.clone();
    let mut stale = 0;
    let mut batch: Vec<Example> = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.max_epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i].clone()));
            let (loss, mut grads) = model.loss_and_gradient(&batch)?;
            let norm = grads.norm();
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    diagnostics: format!(
                        "loss {loss}, gradient norm {norm}, parameter norm {}",
                        model.params.norm()
                    ),
                });
            }
            if norm > config.clip_norm {
                scale(&mut grads, config.clip_norm / norm);
            }
            sgd_step(&mut model.params, &grads, config.learning_rate);
            model.apply_precision();
            total += loss * chunk.len() as f64;
        }
        let train_loss = total / train.len() as f64;
        let val_loss = model.batch_loss(validation)?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: order.len().div_ceil(config.batch_size),
                diagnostics: format!("validation loss {val_loss}"),
            });
        }
        log.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            wall_ms: start.elapsed().as_millis(),
        });
        if val_loss < log.best_val_loss {
            log.best_val_loss = val_loss;
            log.best_epoch = epoch;
            best_params.clone_from(&model.params);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    model.params = best_params;
    Ok((model, log))
}

fn scale(grads: &mut Params, factor: f64) {
    for (_, t) in grads.tensors_mut() {
        t.data.iter_mut().for_each(|g| *g *= factor);
    }
}

fn sgd_step(params: &mut Params, grads: &Params, lr: f64) {
    for ((_, p), (_, g)) in params.tensors_mut().into_iter().zip(grads.tensors()) {
        for (w, d) in p.data.iter_mut().zip(&g.data) {
            *w -= lr * d;
        }
    }
}

/// Per-token perplexity: `exp` of the token-weighted mean cross-entropy.
pub fn perplexity(model: &Seq2SeqModel, examples: &[Example]) -> Result<f64> {
    let mut total = 0.0;
    let mut tokens = 0usize;
    for ex in examples {
        let n = ex.target[1..].iter().filter(|&&y| y != PAD_ID).count();
        total += model.example_loss(ex)? * n as f64;
        tokens += n;
    }
    if tokens == 0 {
        return Err(Error::InvalidInput("no target tokens".into()));
    }
    Ok((total / tokens as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::{ModelConfig, Precision};
    use crate::neural::vocab::build_vocab;

    fn toy() -> (Seq2SeqModel, Vec<Example>) {
        let lines = [
            ("hi there", "hello how can i help"),
            ("my documents", "please upload them again"),
            ("card declined", "sorry try another card"),
            ("thanks", "you are welcome"),
        ];
        let split = |s: &str| s.split_whitespace().map(str::to_owned).collect::<Vec<_>>();
        let corpus: Vec<Vec<String>> = lines
            .iter()
            .flat_map(|(a, b)| [split(a), split(b)])
            .collect();
        let vocab = build_vocab(corpus.iter().map(Vec::as_slice), 1).unwrap();
        let config = ModelConfig {
            variant: Variant::LexicalSocial,
            d_emb: 8,
            d_h: 12,
            precision: Precision::F32,
        };
        let model = Seq2SeqModel::new(config, vocab, 3);
        let examples = lines
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                Example::new(
                    &model.vocab,
                    &split(a),
                    &split(b),
                    SocialVector::new(0.2 * i as f64, 0.5),
                )
            })
            .collect();
        (model, examples)
    }

    fn config(max_epochs: usize, patience: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: 0.5,
            batch_size: 2,
            max_epochs,
            patience,
            clip_norm: 5.0,
            seed: 11,
        }
    }

    #[test]
    fn fixed_seed_gives_identical_curves() {
        let (model, ex) = toy();
        let (m1, l1) = train_examples(model.clone(), &ex, &ex, &config(15, 15)).unwrap();
        let (m2, l2) = train_examples(model, &ex, &ex, &config(15, 15)).unwrap();
        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(l1.train_curve()), bits(l2.train_curve()));
        assert_eq!(bits(l1.val_curve()), bits(l2.val_curve()));
        assert_eq!(m1.params, m2.params);
        assert!(l1.train_curve().last().unwrap() < &l1.train_curve()[0]);
    }

    #[test]
    fn keeps_best_validation_checkpoint() {
        let (model, ex) = toy();
        let (trained, log) = train_examples(model, &ex[..3], &ex[3..], &config(40, 2)).unwrap();
        let last = log.epochs.last().unwrap().val_loss;
        let kept = trained.batch_loss(&ex[3..]).unwrap();
        assert!(kept <= last);
        assert_eq!(kept, log.best_val_loss);
        assert!(log.epochs.iter().all(|e| e.val_loss >= log.best_val_loss));
        assert!(log.to_text().lines().count() == log.epochs.len() + 1);
        let back = TrainingLog::parse(&log.to_text(), "mem").unwrap();
        assert_eq!(back.best_epoch, log.best_epoch);
        assert_eq!(back.epochs.len(), log.epochs.len());
        assert!((back.best_val_loss - log.best_val_loss).abs() < 1e-6);
        assert!(TrainingLog::parse("epoch\ttrain_loss\tval_loss\twall_ms\n", "mem").is_err());
        assert!(TrainingLog::parse("h\n1\t0.5\n", "mem").is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (model, ex) = toy();
        assert!(matches!(
            train_examples(model.clone(), &ex, &[], &config(1, 1)),
            Err(Error::Precondition(_))
        ));
        let mut bad = config(1, 1);
        bad.patience = 0;
        assert!(train_examples(model.clone(), &ex, &ex, &bad).is_err());
        let mut nan = model;
        nan.params.out_b.data[4] = f64::NAN;
        assert!(matches!(
            train_examples(nan, &ex, &ex, &config(1, 1)),
            Err(Error::Divergence {
                epoch: 1,
                batch: 0,
                ..
            })
        ));
    }

    #[test]
    fn perplexity_of_uniform_model() {
        let (mut model, ex) = toy();
        model.params.out_w.data.fill(0.0);
        model.params.out_b.data.fill(0.0);
        let ppl = perplexity(&model, &ex).unwrap();
        assert!((ppl - model.vocab.len() as f64).abs() < 1e-9);
    }
}
