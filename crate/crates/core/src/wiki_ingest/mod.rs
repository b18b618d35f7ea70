//! Fetch and parse Wikipedia page revision histories into streams of
//! consecutive revision text pairs. Two backends sit behind one interface:
//! the live MediaWiki query API and offline XML export dumps.

mod api;
mod cache;
mod dump;
mod markup;

pub use api::ApiClient;
pub use cache::RevisionCache;
pub use dump::parse_dump_file;
pub use markup::strip_markup;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::textcore::Language;

/// Environment variable overriding the MediaWiki API base URL, for testing
/// against a local mock server.
pub const API_BASE_ENV: &str = "WIKITYPER_API_BASE";
/// Environment variable providing a default cache directory.
pub const CACHE_DIR_ENV: &str = "WIKITYPER_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid ingest config: {0}")]
    Config(String),
    #[error("network request failed after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("dump parse error: {0}")]
    Dump(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Two consecutive revisions of one page, markup included as stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionPair {
    pub page_id: u64,
    pub page_title: String,
    pub older_rev_id: u64,
    pub newer_rev_id: u64,
    pub older_text: String,
    pub newer_text: String,
    pub language: Language,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestSource {
    Api,
    Dump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    pub language: Language,
    pub page_budget: usize,
    pub revisions_per_page: usize,
    pub source: IngestSource,
    pub dump_path: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Requests per second against the live API.
    pub rate_limit: f64,
    /// Overrides the `{lang}.wikipedia.org` API endpoint; the
    /// `WIKITYPER_API_BASE` env var takes effect when this is unset.
    pub api_base: Option<String>,
    pub user_agent: String,
    pub max_retries: u32,
    pub retry_base_ms: u64,
    /// Seed for reservoir sampling when the dump holds more pages than the
    /// budget.
    pub seed: u64,
}

impl IngestConfig {
    pub fn new(language: Language, source: IngestSource) -> IngestConfig {
        IngestConfig {
            language,
            page_budget: 1000,
            revisions_per_page: 10,
            source,
            dump_path: None,
            cache_dir: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
            rate_limit: 5.0,
            api_base: None,
            user_agent: format!("wikityper/{}", env!("CARGO_PKG_VERSION")),
            max_retries: 3,
            retry_base_ms: 250,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.page_budget == 0 {
            return Err(IngestError::Config("page budget must be at least 1".into()));
        }
        if self.revisions_per_page == 0 {
            return Err(IngestError::Config(
                "revisions per page must be at least 1".into(),
            ));
        }
        match self.source {
            IngestSource::Api => {
                if self.rate_limit <= 0.0 {
                    return Err(IngestError::Config(
                        "rate limit must be positive for the api source".into(),
                    ));
                }
            }
            IngestSource::Dump => {
                if self.dump_path.is_none() {
                    return Err(IngestError::Config(
                        "dump source requires a dump path".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn resolved_api_base(&self) -> String {
        if let Some(base) = &self.api_base {
            return base.clone();
        }
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            if !base.is_empty() {
                return base;
            }
        }
        format!("https://{}.wikipedia.org/w/api.php", self.language)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub pages_processed: u64,
    pub pairs_emitted: u64,
    pub parse_errors: u64,
    pub skipped_pages: u64,
    pub network_requests: u64,
    pub cache_hits: u64,
}

/// One page's fetched revision history, sorted by revision id ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRevisions {
    pub page_id: u64,
    pub title: String,
    pub revisions: Vec<Revision>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub id: u64,
    pub text: String,
}

impl PageRevisions {
    /// Keep only the `limit` most recent revisions, ids ascending.
    fn truncate_to_recent(&mut self, limit: usize) {
        self.revisions.sort_by_key(|r| r.id);
        self.revisions.dedup_by_key(|r| r.id);
        if self.revisions.len() > limit {
            let start = self.revisions.len() - limit;
            self.revisions.drain(..start);
        }
    }

    fn consecutive_pairs(&self, language: Language) -> Vec<RevisionPair> {
        self.revisions
            .windows(2)
            .map(|w| RevisionPair {
                page_id: self.page_id,
                page_title: self.title.clone(),
                older_rev_id: w[0].id,
                newer_rev_id: w[1].id,
                older_text: w[0].text.clone(),
                newer_text: w[1].text.clone(),
                language,
            })
            .collect()
    }
}

/// Fetch up to `page_budget` pages' worth of consecutive-revision pairs.
/// The pair stream is sorted by (page_id, older_rev_id) so both backends
/// produce identical streams for the same page set.
pub fn fetch_random_pages(
    cfg: &IngestConfig,
) -> Result<(Vec<RevisionPair>, IngestSummary), IngestError> {
    cfg.validate()?;
    let mut summary = IngestSummary::default();
    let mut pages = match cfg.source {
        IngestSource::Dump => {
            let path = cfg.dump_path.as_ref().expect("validated above");
            dump::sample_pages(path, cfg.page_budget, cfg.seed, &mut summary)?
        }
        IngestSource::Api => api::fetch_pages(cfg, &mut summary)?,
    };

    pages.sort_by_key(|p| p.page_id);
    pages.dedup_by_key(|p| p.page_id);
    pages.truncate(cfg.page_budget);

    let mut pairs = Vec::new();
    for page in &mut pages {
        page.truncate_to_recent(cfg.revisions_per_page);
        summary.pages_processed += 1;
        pairs.extend(page.consecutive_pairs(cfg.language));
    }
    summary.pairs_emitted = pairs.len() as u64;
    Ok((pairs, summary))
}
