//! Variable transforms, random-intercept regression and significance tests.

mod hypothesis;
mod regression;
mod report;
mod transform;

pub use hypothesis::{
    chi_square_gof, cohen_kappa, multi_rater_kappa, paired_t_test, welch_t_test, TestKind,
    TestResult,
};
pub use regression::{
    fit_random_intercept, fit_random_intercept_with, FeatureTable, RandomInterceptOptions,
    RegressionFit, Term, INTERCEPT,
};
pub use report::{regression_table, stars, STAR_LEGEND};
pub use transform::{log_standardize, mean, sample_sd, standardize};
