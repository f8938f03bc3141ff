//! Run configuration, the engagement analysis, run manifests and the
//! end-to-end pipeline. The command-line tool calls the stage functions here.

mod analysis;
mod config;
mod manifest;
mod run;

pub use analysis::{
    analyze, analyze_dependent, city_column, engagement_table, fit_engagement_model, Analysis,
    AnalysisModel, Dependent, Subset, COVARIATES, DAYS_SINCE_SIGNUP, DRIVER_AGE, MSG_LENGTH,
    NUM_DRIVER_MSGS, POLITENESS, POSITIVITY,
};
pub use config::RunConfig;
pub use manifest::{
    sha256_hex, write_atomic, write_failed_marker, FileFingerprint, RunManifest, FAILED_MARKER,
    MANIFEST_FILE, TOOLKIT_VERSION,
};
pub use run::{
    render_report, render_tables, run_pipeline, run_pipeline_detailed, score_table, train_variant,
    train_vocab, training_table, write_corpus, PipelineRun, CONVERSATIONS_FILE, DRIVERS_FILE,
    PAIRS_FILE, REPORT_FILE, STAGES,
};
