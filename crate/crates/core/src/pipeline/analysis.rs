use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::MessagePair;
use crate::social_features::SocialScorer;
use crate::stats::{
    fit_random_intercept, log_standardize, regression_table, standardize, FeatureTable,
    RegressionFit,
};
use crate::{Error, Result};

pub const DRIVER_AGE: &str = "Driver age";
pub const DAYS_SINCE_SIGNUP: &str = "Days since signup";
pub const NUM_DRIVER_MSGS: &str = "Num of driver msg";
pub const MSG_LENGTH: &str = "CSR msg length";
pub const POLITENESS: &str = "Politeness";
pub const POSITIVITY: &str = "Positivity";

/// Continuous covariates in table order.
pub const COVARIATES: [&str; 6] = [
    DRIVER_AGE,
    DAYS_SINCE_SIGNUP,
    NUM_DRIVER_MSGS,
    MSG_LENGTH,
    POLITENESS,
    POSITIVITY,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependent {
    Responded24h,
    FirstTrip7d,
}

impl Dependent {
    pub const ALL: [Dependent; 2] = [Dependent::Responded24h, Dependent::FirstTrip7d];

    pub fn name(self) -> &'static str {
        match self {
            Dependent::Responded24h => "responded_24h",
            Dependent::FirstTrip7d => "first_trip_7d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s)
    }

    fn value(self, p: &MessagePair) -> f64 {
        let b = match self {
            Dependent::Responded24h => p.responded_24h,
            Dependent::FirstTrip7d => p.first_trip_7d,
        };
        if b {
            1.0
        } else {
            0.0
        }
    }
}

/// Which agent messages enter a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// Model 1.
    All,
    /// Model 2: drops messages containing "congrats" or "congratulations".
    NoCongratulations,
    /// Model 3: keeps messages containing a question mark.
    Questions,
}

impl Subset {
    pub fn label(self) -> &'static str {
        match self {
            Subset::All => "Model 1",
            Subset::NoCongratulations => "Model 2",
            Subset::Questions => "Model 3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Subset::All => "all agent messages",
            Subset::NoCongratulations => "without \"congrats\"/\"congratulations\"",
            Subset::Questions => "agent messages containing \"?\"",
        }
    }

    pub fn keeps(self, p: &MessagePair) -> bool {
        let tokens = &p.agent_msg.tokens;
        match self {
            Subset::All => true,
            Subset::NoCongratulations => !tokens
                .iter()
                .any(|t| t == "congrats" || t == "congratulations"),
            Subset::Questions => tokens.iter().any(|t| t == "?"),
        }
    }
}

/// One row per pair, grouped by driver: both outcomes, the six standardized
/// covariates and one dummy per signup city after the first (sorted).
///
/// Age and message length are z-scored; days since signup and the prior
/// message count are `log1p`-transformed first. Politeness and positivity
/// are the scorer's values for the agent message, z-scored.
pub fn engagement_table(pairs: &[MessagePair], scorer: &SocialScorer) -> Result<FeatureTable> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no message pairs to analyze".into()));
    }
    let col = |f: &dyn Fn(&MessagePair) -> f64| pairs.iter().map(f).collect::<Vec<f64>>();
    let mut table = FeatureTable::new(pairs.iter().map(|p| p.driver_id.clone()).collect());
    for d in Dependent::ALL {
        table.add_column(d.name(), col(&|p| d.value(p)))?;
    }
    let named = |name: &str, r: Result<Vec<f64>>| {
        r.map_err(|e| match e {
            Error::DegenerateColumn(m) => Error::DegenerateColumn(format!("{name}: {m}")),
            Error::Domain(m) => Error::Domain(format!("{name}: {m}")),
            other => other,
        })
    };
    table.add_column(
        DRIVER_AGE,
        named(DRIVER_AGE, standardize(&col(&|p| p.driver_age)))?,
    )?;
    table.add_column(
        DAYS_SINCE_SIGNUP,
        named(
            DAYS_SINCE_SIGNUP,
            log_standardize(&col(&|p| p.days_since_signup)),
        )?,
    )?;
    table.add_column(
        NUM_DRIVER_MSGS,
        named(
            NUM_DRIVER_MSGS,
            log_standardize(&col(&|p| p.num_prior_driver_msgs as f64)),
        )?,
    )?;
    table.add_column(
        MSG_LENGTH,
        named(
            MSG_LENGTH,
            standardize(&col(&|p| p.agent_msg.raw_text.chars().count() as f64)),
        )?,
    )?;
    table.add_column(
        POLITENESS,
        named(
            POLITENESS,
            standardize(&col(&|p| scorer.politeness_score(&p.agent_msg))),
        )?,
    )?;
    table.add_column(
        POSITIVITY,
        named(
            POSITIVITY,
            standardize(&col(&|p| scorer.positivity_score(&p.agent_msg))),
        )?,
    )?;
    let cities: BTreeSet<&str> = pairs.iter().map(|p| p.signup_city.as_str()).collect();
    for city in cities.iter().skip(1) {
        table.add_column(
            city_column(city),
            col(&|p| if p.signup_city == *city { 1.0 } else { 0.0 }),
        )?;
    }
    Ok(table)
}

pub fn city_column(city: &str) -> String {
    format!("City: {city}")
}

/// Fits one model. Covariates that are constant within the subset (a city
/// absent from it, say) are left out rather than making the design singular.
pub fn fit_engagement_model(
    table: &FeatureTable,
    pairs: &[MessagePair],
    dependent: Dependent,
    subset: Subset,
) -> Result<RegressionFit> {
    if table.n_rows() != pairs.len() {
        return Err(Error::LengthMismatch {
            left: table.n_rows(),
            right: pairs.len(),
        });
    }
    let mask: Vec<bool> = pairs.iter().map(|p| subset.keeps(p)).collect();
    let rows = table.filter_rows(&mask)?;
    if rows.n_rows() == 0 {
        return Err(Error::InvalidInput(format!(
            "{}: no pairs are {}",
            subset.label(),
            subset.description()
        )));
    }
    let dep = dependent.name();
    let covariates: Vec<&str> = rows
        .column_names()
        .filter(|&n| Dependent::parse(n).is_none())
        .filter(|&n| {
            let c = rows.column(n).unwrap_or(&[]);
            c.iter().any(|&x| x != c[0])
        })
        .collect();
    fit_random_intercept(&rows, dep, &covariates)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisModel {
    pub subset: Subset,
    pub dependent: Dependent,
    pub fit: RegressionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub models: Vec<AnalysisModel>,
}

impl Analysis {
    pub fn model(&self, subset: Subset, dependent: Dependent) -> Option<&RegressionFit> {
        self.models
            .iter()
            .find(|m| m.subset == subset && m.dependent == dependent)
            .map(|m| &m.fit)
    }

    /// Coefficient table, one column per model, plus the subset notes.
    pub fn to_table(&self) -> String {
        let cols: Vec<(&str, &RegressionFit)> = self
            .models
            .iter()
            .map(|m| (m.subset.label(), &m.fit))
            .collect();
        let mut out = regression_table(&cols);
        let mut seen = Vec::new();
        for m in &self.models {
            if !seen.contains(&m.subset) {
                seen.push(m.subset);
                let _ = writeln!(out, "{}: {}", m.subset.label(), m.subset.description());
            }
        }
        out
    }
}

/// Model 1 on both outcomes, then Models 2 and 3 on driver response.
pub fn analyze(pairs: &[MessagePair], scorer: &SocialScorer) -> Result<Analysis> {
    let plan = [
        (Subset::All, Dependent::Responded24h),
        (Subset::All, Dependent::FirstTrip7d),
        (Subset::NoCongratulations, Dependent::Responded24h),
        (Subset::Questions, Dependent::Responded24h),
    ];
    run_plan(pairs, scorer, &plan)
}

/// Models 1 to 3 on one outcome.
pub fn analyze_dependent(
    pairs: &[MessagePair],
    scorer: &SocialScorer,
    dependent: Dependent,
) -> Result<Analysis> {
    let plan = [Subset::All, Subset::NoCongratulations, Subset::Questions].map(|s| (s, dependent));
    run_plan(pairs, scorer, &plan)
}

fn run_plan(
    pairs: &[MessagePair],
    scorer: &SocialScorer,
    plan: &[(Subset, Dependent)],
) -> Result<Analysis> {
    let table = engagement_table(pairs, scorer)?;
    let models = plan
        .iter()
        .map(|&(subset, dependent)| {
            Ok(AnalysisModel {
                subset,
                dependent,
                fit: fit_engagement_model(&table, pairs, dependent, subset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis { models })
}
