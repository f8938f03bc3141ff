//! Paired and Welch t-tests, chi-square goodness of fit, multi-rater kappa.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use super::transform::{mean, sample_sd};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    PairedT,
    WelchT,
    ChiSquare,
    Kappa,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::PairedT => "paired_t",
            TestKind::WelchT => "welch_t",
            TestKind::ChiSquare => "chi_square",
            TestKind::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

fn two_sided_t(t: f64, df: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

/// Paired t on d = a - b with a two-sided Student-t p-value.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput(
            "paired t-test needs at least two pairs".into(),
        ));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDifference);
    }
    let n = d.len() as f64;
    let sd = sample_sd(&d);
    let t = if sd == 0.0 {
        f64::INFINITY.copysign(mean(&d))
    } else {
        mean(&d) / (sd / n.sqrt())
    };
    let df = n - 1.0;
    let p_value = if t.is_finite() {
        two_sided_t(t, df)?
    } else {
        0.0
    };
    Ok(TestResult {
        kind: TestKind::PairedT,
        statistic: t,
        df,
        p_value,
    })
}

/// Unequal-variance two-sample t with Welch-Satterthwaite df.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput(
            "Welch t-test needs at least two values per sample".into(),
        ));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_sd(a).powi(2) / na, sample_sd(b).powi(2) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Err(Error::ZeroDifference);
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult {
        kind: TestKind::WelchT,
        statistic: t,
        df,
        p_value: two_sided_t(t, df)?,
    })
}

/// Pearson goodness of fit, df = cells - 1, upper-tail p.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> Result<TestResult> {
    if observed.len() != expected.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: expected.len(),
        });
    }
    if observed.len() < 2 {
        return Err(Error::InvalidInput(
            "chi-square needs at least two cells".into(),
        ));
    }
    if let Some(e) = expected.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Domain(format!(
            "expected count {e} must be positive"
        )));
    }
    if let Some(o) = observed.iter().find(|o| !(**o >= 0.0)) {
        return Err(Error::Domain(format!(
            "observed count {o} must be non-negative"
        )));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let df = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(TestResult {
        kind: TestKind::ChiSquare,
        statistic: stat,
        df,
        p_value: dist.sf(stat).clamp(0.0, 1.0),
    })
}

/// Cohen's kappa for two raters; errors when chance agreement is 1.
pub fn cohen_kappa(a: &[u32], b: &[u32]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let categories: std::collections::BTreeSet<u32> = a.iter().chain(b).copied().collect();
    let chance: f64 = categories
        .iter()
        .map(|c| {
            let pa = a.iter().filter(|x| *x == c).count() as f64 / n;
            let pb = b.iter().filter(|x| *x == c).count() as f64 / n;
            pa * pb
        })
        .sum();
    if chance >= 1.0 {
        return Err(Error::UndefinedKappa(
            "both raters used a single category, chance agreement is 1".into(),
        ));
    }
    Ok(((agree - chance) / (1.0 - chance), chance))
}

/// Light's kappa: the mean pairwise Cohen's kappa over all rater pairs.
///
/// `ratings[i][r]` is rater `r`'s category for item `i`. The p-value is a
/// two-sided normal test of kappa against 0 with the mean of the pairwise
/// null standard errors `sqrt(p_e / (n (1 - p_e)))`; `df` reports the number
/// of items.
pub fn multi_rater_kappa(ratings: &[Vec<u32>]) -> Result<TestResult> {
    let n_items = ratings.len();
    if n_items < 2 {
        return Err(Error::InvalidInput("kappa needs at least two items".into()));
    }
    let k = ratings[0].len();
    if k < 2 {
        return Err(Error::InvalidInput(
            "kappa needs at least two raters".into(),
        ));
    }
    if let Some(row) = ratings.iter().find(|r| r.len() != k) {
        return Err(Error::LengthMismatch {
            left: row.len(),
            right: k,
        });
    }
    let first = ratings[0][0];
    if ratings.iter().flatten().all(|&c| c == first) {
        return Err(Error::UndefinedKappa(
            "every rating is the same category".into(),
        ));
    }
    let column = |r: usize| -> Vec<u32> { ratings.iter().map(|row| row[r]).collect() };
    let n = n_items as f64;
    let mut kappas = Vec::new();
    let mut null_ses = Vec::new();
    for r1 in 0..k {
        for r2 in r1 + 1..k {
            let (kappa, chance) = cohen_kappa(&column(r1), &column(r2))?;
            kappas.push(kappa);
            null_ses.push((chance / (n * (1.0 - chance))).sqrt());
        }
    }
    let kappa = mean(&kappas);
    let se = mean(&null_ses);
    let p_value = if se > 0.0 {
        let z = kappa / se;
        (2.0 * Normal::standard().sf(z.abs())).clamp(0.0, 1.0)
    } else if kappa.abs() > 0.0 {
        0.0
    } else {
        1.0
    };
    Ok(TestResult {
        kind: TestKind::Kappa,
        statistic: kappa,
        df: n,
        p_value,
    })
}
