//! Measuring and generating social language in task-oriented conversations.
//!
//! The crate covers the whole workflow: a conversation data model with PII
//! redaction and driver-disjoint splitting ([`corpus`]), politeness and
//! positivity scorers ([`social_features`]), grouped regression and
//! significance tests ([`stats`]), an LSTM encoder/decoder with an optional
//! social-fusion layer ([`neural`]), content-preservation and enhancement
//! evaluation ([`eval`]), and the end-to-end pipeline ([`pipeline`]).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod neural;
pub mod pipeline;
pub mod social_features;
pub mod stats;

pub use error::{Error, Result};
