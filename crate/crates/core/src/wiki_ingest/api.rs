//! Live MediaWiki query API backend: random-page sampling with revision
//! content, polite rate limiting, retry with exponential backoff, and a
//! cache-first policy so warm reruns make zero network requests.

use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::cache::RevisionCache;
use super::{IngestConfig, IngestError, IngestSummary, PageRevisions, Revision};

pub struct ApiClient {
    http: reqwest::blocking::Client,
    base: String,
    min_interval: Duration,
    last_request: Option<Instant>,
    max_retries: u32,
    retry_base: Duration,
}

#[derive(Deserialize)]
struct QueryResponse {
    query: Option<QueryBody>,
}

#[derive(Deserialize)]
struct QueryBody {
    #[serde(default)]
    pages: Vec<ApiPage>,
}

#[derive(Deserialize)]
struct ApiPage {
    pageid: u64,
    title: String,
    #[serde(default)]
    revisions: Vec<ApiRevision>,
}

#[derive(Deserialize)]
struct ApiRevision {
    revid: u64,
    slots: Option<ApiSlots>,
}

#[derive(Deserialize)]
struct ApiSlots {
    main: Option<ApiSlot>,
}

#[derive(Deserialize)]
struct ApiSlot {
    content: Option<String>,
}

impl ApiClient {
    pub fn new(cfg: &IngestConfig) -> Result<ApiClient, IngestError> {
        let http = reqwest::blocking::Client::builder()
            .user_agent(cfg.user_agent.clone())
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| IngestError::Config(format!("http client: {e}")))?;
        Ok(ApiClient {
            http,
            base: cfg.resolved_api_base(),
            min_interval: Duration::from_secs_f64(1.0 / cfg.rate_limit),
            last_request: None,
            max_retries: cfg.max_retries,
            retry_base: Duration::from_millis(cfg.retry_base_ms),
        })
    }

    fn throttle(&mut self) {
        if let Some(last) = self.last_request {
            let elapsed = last.elapsed();
            if elapsed < self.min_interval {
                thread::sleep(self.min_interval - elapsed);
            }
        }
        self.last_request = Some(Instant::now());
    }

    /// One random main-namespace page with its most recent revisions.
    /// `grnlimit=1` because the API only returns multiple revisions per page
    /// for single-page queries.
    pub fn fetch_random_page(
        &mut self,
        revisions: usize,
        summary: &mut IngestSummary,
    ) -> Result<Option<PageRevisions>, IngestError> {
        let rvlimit = revisions.to_string();
        let params: &[(&str, &str)] = &[
            ("action", "query"),
            ("format", "json"),
            ("formatversion", "2"),
            ("generator", "random"),
            ("grnnamespace", "0"),
            ("grnlimit", "1"),
            ("prop", "revisions"),
            ("rvprop", "ids|content"),
            ("rvslots", "main"),
            ("rvlimit", &rvlimit),
        ];

        let mut attempt = 0;
        let body: QueryResponse = loop {
            attempt += 1;
            self.throttle();
            summary.network_requests += 1;
            let result = self
                .http
                .get(&self.base)
                .query(params)
                .send()
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.json::<QueryResponse>());
            match result {
                Ok(body) => break body,
                Err(e) if attempt <= self.max_retries => {
                    log::warn!("api request failed (attempt {attempt}): {e}");
                    thread::sleep(self.retry_base * 2u32.pow(attempt - 1));
                }
                Err(e) => {
                    return Err(IngestError::Network {
                        attempts: attempt,
                        message: e.to_string(),
                    })
                }
            }
        };

        let Some(page) = body.query.and_then(|q| q.pages.into_iter().next()) else {
            return Ok(None);
        };
        let revisions = page
            .revisions
            .into_iter()
            .map(|r| Revision {
                id: r.revid,
                text: r
                    .slots
                    .and_then(|s| s.main)
                    .and_then(|m| m.content)
                    .unwrap_or_default(),
            })
            .collect();
        Ok(Some(PageRevisions {
            page_id: page.pageid,
            title: page.title,
            revisions,
        }))
    }
}

/// Collect up to `page_budget` pages, serving complete cached pages first.
/// A fully warm cache satisfies the budget with zero network requests.
pub fn fetch_pages(
    cfg: &IngestConfig,
    summary: &mut IngestSummary,
) -> Result<Vec<PageRevisions>, IngestError> {
    let mut cache = match &cfg.cache_dir {
        Some(dir) => Some(RevisionCache::open(dir, cfg.language)?),
        None => None,
    };

    let mut pages: Vec<PageRevisions> = Vec::new();
    if let Some(cache) = &cache {
        for page_id in cache.complete_pages() {
            if pages.len() >= cfg.page_budget {
                break;
            }
            if let Some(page) = cache.load_page(page_id)? {
                summary.cache_hits += 1;
                pages.push(page);
            }
        }
    }

    let mut client = ApiClient::new(cfg)?;
    // The random generator can repeat pages; cap total draws so a tiny wiki
    // (or mock server) cannot loop forever.
    let max_draws = cfg.page_budget.saturating_mul(5).max(20);
    let mut draws = 0;
    while pages.len() < cfg.page_budget && draws < max_draws {
        draws += 1;
        let Some(page) = client.fetch_random_page(cfg.revisions_per_page, summary)? else {
            continue;
        };
        if pages.iter().any(|p| p.page_id == page.page_id) {
            continue;
        }
        if let Some(cache) = cache.as_mut() {
            cache.store_page(&page)?;
        }
        pages.push(page);
    }
    Ok(pages)
}
