//! Linear model with a per-group random intercept, fit by REML.
//!
//! For y = Xb + u_g + e with u_g ~ N(0, s_u^2) and e ~ N(0, s^2), write
//! g = s_u^2 / s^2. Each group's covariance is s^2 (I + g 11'), whose inverse
//! is I - c 11' with c = g / (1 + n_g g), so every GLS quantity reduces to
//! per-group sums. The REML criterion is profiled over s^2 and minimized over
//! g by a log-spaced grid followed by golden-section refinement; the GLS
//! solve at each g gives b.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Named numeric columns over rows that each belong to a group.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureTable {
    columns: Vec<(String, Vec<f64>)>,
    groups: Vec<String>,
}

impl FeatureTable {
    pub fn new(groups: Vec<String>) -> Self {
        Self {
            columns: Vec::new(),
            groups,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    /// Adds or replaces a column.
    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.n_rows(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput(format!("column `{name}` contains NaN")));
        }
        match self.columns.iter_mut().find(|(n, _)| *n == name) {
            Some((_, col)) => *col = values,
            None => self.columns.push((name, values)),
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named `{name}`")))
    }

    /// Rows whose mask entry is true, in order.
    pub fn filter_rows(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: mask.len(),
                right: self.n_rows(),
            });
        }
        let pick = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(x, _)| *x)
                .collect()
        };
        Ok(Self {
            columns: self
                .columns
                .iter()
                .map(|(n, v)| (n.clone(), pick(v)))
                .collect(),
            groups: self
                .groups
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(g, _)| g.clone())
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub dependent: String,
    /// Intercept first, then covariates in the order requested.
    pub terms: Vec<Term>,
    pub random_intercept_variance: f64,
    pub residual_variance: f64,
    pub n_rows: usize,
    pub n_groups: usize,
    /// Residual degrees of freedom used for the t reference distribution.
    pub df: f64,
    /// -2 times the restricted log-likelihood, up to a constant.
    pub reml_criterion: f64,
}

impl RegressionFit {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.coefficient)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.std_error)
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.term(name).map(|t| t.p_value)
    }

    pub fn coefficients(&self) -> BTreeMap<String, f64> {
        self.terms
            .iter()
            .map(|t| (t.name.clone(), t.coefficient))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomInterceptOptions {
    /// Fix s_u^2 / s^2 instead of estimating it; `Some(0.0)` gives OLS.
    pub fixed_variance_ratio: Option<f64>,
    /// Absolute tolerance on the estimated s_u^2.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RandomInterceptOptions {
    fn default() -> Self {
        Self {
            fixed_variance_ratio: None,
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

pub fn fit_random_intercept(
    table: &FeatureTable,
    dependent: &str,
    covariates: &[&str],
) -> Result<RegressionFit> {
    fit_random_intercept_with(
        table,
        dependent,
        covariates,
        RandomInterceptOptions::default(),
    )
}

/// Group-level sufficient statistics.
struct Sums {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    /// (n_g, X' 1_g, 1_g' y)
    groups: Vec<(f64, DVector<f64>, f64)>,
    n: usize,
    p: usize,
}

struct Gls {
    beta: DVector<f64>,
    /// (X' H^-1 X)^-1
    cov_unscaled: DMatrix<f64>,
    rss: f64,
    criterion: f64,
}

impl Sums {
    fn gls(&self, ratio: f64) -> Option<Gls> {
        let mut a = self.xtx.clone();
        let mut b = self.xty.clone();
        let mut yhy = self.yty;
        let mut logdet_h = 0.0;
        if ratio > 0.0 {
            for (ng, s, t) in &self.groups {
                let c = ratio / (1.0 + ng * ratio);
                a -= s * s.transpose() * c;
                b -= s * (c * t);
                yhy -= c * t * t;
                logdet_h += (ng * ratio).ln_1p();
            }
        }
        let chol = a.cholesky()?;
        let beta = chol.solve(&b);
        let rss = yhy - beta.dot(&b);
        let logdet_a: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let dof = (self.n - self.p) as f64;
        let sigma2 = rss / dof;
        let criterion = dof * sigma2.ln() + logdet_h + logdet_a;
        Some(Gls {
            beta,
            cov_unscaled: chol.inverse(),
            rss,
            criterion,
        })
    }

    fn criterion(&self, ratio: f64) -> f64 {
        self.gls(ratio).map_or(f64::INFINITY, |g| {
            if g.criterion.is_nan() {
                f64::INFINITY
            } else {
                g.criterion
            }
        })
    }
}

/// Names the columns that are (numerically) linear combinations of earlier
/// ones, together with the columns they depend on.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Option<Vec<String>> {
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        if kept.is_empty() {
            if norm == 0.0 {
                return Some(vec![names[j].clone()]);
            }
            kept.push(j);
            continue;
        }
        let basis = x.select_columns(&kept);
        let coef = basis
            .clone()
            .svd(true, true)
            .solve(&col, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(kept.len()));
        let resid = &col - &basis * &coef;
        if norm == 0.0 || resid.norm() <= 1e-9 * norm {
            let mut out: Vec<String> = kept
                .iter()
                .zip(coef.iter())
                .filter(|(_, c)| c.abs() > 1e-8)
                .map(|(&k, _)| names[k].clone())
                .collect();
            out.push(names[j].clone());
            return Some(out);
        }
        kept.push(j);
    }
    None
}

fn golden_section(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

pub fn fit_random_intercept_with(
    table: &FeatureTable,
    dependent: &str,
    covariates: &[&str],
    options: RandomInterceptOptions,
) -> Result<RegressionFit> {
    let n = table.n_rows();
    let y = table.require(dependent)?;
    let mut names = vec![INTERCEPT.to_owned()];
    let mut x = DMatrix::from_element(n, covariates.len() + 1, 1.0);
    for (j, name) in covariates.iter().enumerate() {
        let col = table.require(name)?;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "column `{name}` has non-finite values"
            )));
        }
        x.column_mut(j + 1).copy_from_slice(col);
        names.push((*name).to_owned());
    }
    let p = names.len();
    if n <= p {
        return Err(Error::InvalidInput(format!("{n} rows for {p} parameters")));
    }
    if let Some(columns) = collinear_columns(&x, &names) {
        return Err(Error::Singular { columns });
    }

    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut groups: Vec<(f64, DVector<f64>, f64)> = Vec::new();
    for (i, g) in table.groups().iter().enumerate() {
        let k = *index.entry(g.as_str()).or_insert_with(|| {
            groups.push((0.0, DVector::zeros(p), 0.0));
            groups.len() - 1
        });
        let entry = &mut groups[k];
        entry.0 += 1.0;
        entry.1 += x.row(i).transpose();
        entry.2 += y[i];
    }
    if groups.len() < 2 {
        return Err(Error::InvalidInput("need at least two groups".into()));
    }
    let yv = DVector::from_column_slice(y);
    let sums = Sums {
        xtx: x.transpose() * &x,
        xty: x.transpose() * &yv,
        yty: yv.dot(&yv),
        groups,
        n,
        p,
    };

    let ols = sums.gls(0.0).ok_or_else(|| Error::Singular {
        columns: names.clone(),
    })?;
    let ratio = match options.fixed_variance_ratio {
        Some(r) if r >= 0.0 && r.is_finite() => r,
        Some(r) => {
            return Err(Error::InvalidInput(format!(
                "variance ratio {r} must be >= 0"
            )))
        }
        // An exact fit leaves nothing to partition between the two variances.
        None if ols.rss <= 1e-24 * sums.yty.max(1.0) => 0.0,
        None => estimate_ratio(&sums, ols.rss / (n - p) as f64, &options),
    };

    let fit = sums.gls(ratio).ok_or_else(|| Error::Singular {
        columns: names.clone(),
    })?;
    let df = (n - p) as f64;
    let sigma2 = (fit.rss / df).max(0.0);
    let t_dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Domain(e.to_string()))?;
    let terms = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let coefficient = fit.beta[j];
            let std_error = (sigma2 * fit.cov_unscaled[(j, j)]).max(0.0).sqrt();
            let t_value = coefficient / std_error;
            let p_value = if t_value.is_finite() {
                (2.0 * t_dist.sf(t_value.abs())).clamp(0.0, 1.0)
            } else if coefficient.abs() > 0.0 {
                0.0
            } else {
                1.0
            };
            Term {
                name,
                coefficient,
                std_error,
                t_value,
                p_value,
            }
        })
        .collect();
    Ok(RegressionFit {
        dependent: dependent.to_owned(),
        terms,
        random_intercept_variance: ratio * sigma2,
        residual_variance: sigma2,
        n_rows: n,
        n_groups: sums.groups.len(),
        df,
        reml_criterion: fit.criterion,
    })
}

fn estimate_ratio(sums: &Sums, sigma2_ols: f64, options: &RandomInterceptOptions) -> f64 {
    let grid: Vec<f64> = std::iter::once(0.0)
        .chain((0..=56).map(|k| 10f64.powf(-8.0 + 0.25 * f64::from(k))))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| sums.criterion(r)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    // Tolerance on s_u^2 = ratio * s^2, using the OLS scale.
    let tol = options.tolerance / sigma2_ols.max(f64::MIN_POSITIVE);
    let refined = golden_section(|r| sums.criterion(r), lo, hi, tol, options.max_iterations);
    // The boundary is a candidate too.
    [refined, grid[best], 0.0]
        .into_iter()
        .min_by(|a, b| sums.criterion(*a).total_cmp(&sums.criterion(*b)))
        .unwrap_or(0.0)
}
