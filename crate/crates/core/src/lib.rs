//! Support-seeking analysis for forum post titles.
//!
//! The crate scores how much emotional and informational support a post
//! title asks for, using a random-forest regressor over lexicon, structural,
//! part-of-speech and LDA topic features, and then correlates per-user
//! support scores with the number of comments those users receive.
//!
//! Modules follow the analysis from raw dump to report:
//!
//! - [`corpus`]: JSONL ingestion, dataset summary, no-comment rate, user filter
//! - [`textproc`]: tokenizer, sentence splitter, coarse POS tagger
//! - [`lexicons`]: category, subjectivity and drug-name lexicons
//! - [`topics`]: LDA via collapsed Gibbs sampling
//! - [`features`]: the fixed feature schema and extraction
//! - [`forest`]: random-forest regression
//! - [`stats`]: Pearson correlation, Student-t p-values, ICC, splitting
//! - [`pipeline`]: annotations, model training, scoring, engagement report
//! - [`cli`]: the subcommand surface used by the `support-signal` binary
//! - [`synthetic`]: seeded generators for planted-signal fixtures

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod features;
pub mod forest;
pub mod lexicons;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synthetic;
pub mod textproc;
pub mod topics;

pub use error::{Error, Result};
