use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Example, Precision, Seq2SeqModel};
use crate::{Error, Result};

/// Minimum number of parameters probed per check.
pub const MIN_CHECKED: usize = 200;
/// Step where truncation and round-off error are balanced for losses of
/// order one.
pub const DEFAULT_EPSILON: f64 = 1e-4;
/// Denominator floor so that exactly-zero gradients compare as equal.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub max_relative_error: f64,
    /// Largest error per tensor, in checkpoint order.
    pub per_tensor: Vec<(String, f64)>,
    pub n_checked: usize,
}

/// `|a - n| / max(|a| + |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares backprop gradients of the mean loss over `sample` with central
/// finite differences on at least [`MIN_CHECKED`] parameters, drawn from
/// every tensor. Requires 64-bit parameters.
pub fn gradient_check(
    model: &Seq2SeqModel,
    sample_set: &[Example],
    epsilon: f64,
) -> Result<GradientCheckReport> {
    gradient_check_seeded(model, sample_set, epsilon, 0)
}

pub fn gradient_check_seeded(
    model: &Seq2SeqModel,
    sample_set: &[Example],
    epsilon: f64,
    seed: u64,
) -> Result<GradientCheckReport> {
    if model.config.precision != Precision::F64 {
        return Err(Error::Precondition(
            "gradient checking needs 64-bit parameters".into(),
        ));
    }
    if sample_set.is_empty() || !(epsilon > 0.0) {
        return Err(Error::InvalidInput(
            "need a non-empty sample and a positive epsilon".into(),
        ));
    }
    let (_, grads) = model.loss_and_gradient(sample_set)?;
    let grad_tensors = grads.tensors();
    let sizes: Vec<usize> = grad_tensors.iter().map(|(_, t)| t.data.len()).collect();
    let total: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = model.clone();
    let mut per_tensor = Vec::with_capacity(sizes.len());
    let mut n_checked = 0;
    let mut max_err = 0.0f64;
    for (k, &size) in sizes.iter().enumerate() {
        // Proportional share, at least 16 per tensor.
        let want = (MIN_CHECKED * size).div_ceil(total).max(16).min(size);
        let picks = sample(&mut rng, size, want).into_vec();
        let mut worst = 0.0f64;
        for idx in picks {
            let original = probe.params.tensors()[k].1.data[idx];
            let shifted = |delta: f64, m: &mut Seq2SeqModel| -> Result<f64> {
                m.params.tensors_mut()[k].1.data[idx] = original + delta;
                m.batch_loss(sample_set)
            };
            let plus = shifted(epsilon, &mut probe)?;
            let minus = shifted(-epsilon, &mut probe)?;
            probe.params.tensors_mut()[k].1.data[idx] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            let err = relative_error(grad_tensors[k].1.data[idx], numeric);
            worst = worst.max(err);
            n_checked += 1;
        }
        max_err = max_err.max(worst);
        per_tensor.push((grad_tensors[k].0.to_owned(), worst));
    }
    Ok(GradientCheckReport {
        max_relative_error: max_err,
        per_tensor,
        n_checked,
    })
}
