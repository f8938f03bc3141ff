use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Centers to mean 0 and scales to sample SD 1.
pub fn standardize(column: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = column.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite value {x}")));
    }
    let first = column.first().copied();
    if column.len() < 2 || column.iter().all(|&x| Some(x) == first) {
        return Err(Error::DegenerateColumn(
            "standardizing needs at least two distinct values".into(),
        ));
    }
    let m = mean(column);
    let sd = sample_sd(column);
    Ok(column.iter().map(|x| (x - m) / sd).collect())
}

/// `log(1 + x)` then [`standardize`]; `log1p` keeps zero counts finite.
pub fn log_standardize(column: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = column.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!(
            "log transform needs values >= 0, got {x}"
        )));
    }
    let logged: Vec<f64> = column.iter().map(|x| x.ln_1p()).collect();
    standardize(&logged)
}
