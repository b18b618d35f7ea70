//! wikityper: mine real-world spelling errors from Wikipedia revision
//! histories, inject them (or keyboard-adjacency noise) into NLP datasets,
//! and measure the clean-vs-noisy performance gap of model predictions.

pub mod corpus_stats;
pub mod dataset;
pub mod eval_gap;
pub mod keyboard_noise;
pub mod noise_injection;
pub mod pipeline;
pub mod round;
pub mod textcore;
pub mod typo_mining;
pub mod wiki_ingest;

pub use textcore::Language;
