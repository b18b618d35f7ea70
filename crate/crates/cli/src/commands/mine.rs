//! `wikityper mine`: fetch revision histories and mine a typo dictionary.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde_json::json;

use wikityper::pipeline::{mine_dictionary, MineOptions};
use wikityper::wiki_ingest::{IngestConfig, IngestError, IngestSource};

use super::{parse_language, require};
use crate::config::FileConfig;
use crate::invalid;
use crate::manifest::{out_dir_of, RunManifest};

#[derive(Args, Debug)]
pub struct MineArgs {
    /// Language code (en, de, es, fr, hi, tr).
    #[arg(long)]
    lang: Option<String>,
    /// Number of random pages to process.
    #[arg(long)]
    pages: Option<usize>,
    /// Revisions fetched per page.
    #[arg(long)]
    revs_per_page: Option<usize>,
    /// Ingestion backend: api or dump.
    #[arg(long)]
    source: Option<String>,
    /// XML export dump (optionally .bz2) for --source dump.
    #[arg(long)]
    dump_path: Option<PathBuf>,
    /// Revision cache directory; also set via WIKITYPER_CACHE_DIR.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Maximum API requests per second.
    #[arg(long)]
    rate_limit: Option<f64>,
    /// Drop entries seen fewer than this many times.
    #[arg(long)]
    min_frequency: Option<u32>,
    /// Drop pairs that differ only in letter case.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    drop_case_only: Option<bool>,
    /// Seed for page sampling from dumps.
    #[arg(long)]
    seed: Option<u64>,
    /// Output dictionary (TSV).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: MineArgs, file: &FileConfig, workers: Option<usize>) -> anyhow::Result<()> {
    let section = &file.mine;
    let lang = args.lang.or_else(|| section.lang.clone()).unwrap_or_else(|| "en".to_string());
    let language = parse_language(&lang)?;
    let source = args.source.or_else(|| section.source.clone()).unwrap_or_else(|| "api".to_string());
    let source = match source.as_str() {
        "api" => IngestSource::Api,
        "dump" => IngestSource::Dump,
        other => return Err(invalid(format!("unknown source {other:?} (expected api or dump)"))),
    };
    let out = require(args.out.or_else(|| section.out.clone()), "--out")?;

    let mut cfg = IngestConfig::new(language, source);
    if let Some(pages) = args.pages.or(section.pages) {
        cfg.page_budget = pages;
    }
    if let Some(revs) = args.revs_per_page.or(section.revs_per_page) {
        cfg.revisions_per_page = revs;
    }
    if let Some(path) = args.dump_path.or_else(|| section.dump_path.clone()) {
        cfg.dump_path = Some(path);
    }
    if let Some(dir) = args.cache_dir.or_else(|| section.cache_dir.clone()) {
        cfg.cache_dir = Some(dir);
    }
    if let Some(rate) = args.rate_limit.or(section.rate_limit) {
        cfg.rate_limit = rate;
    }
    if let Some(seed) = args.seed.or(section.seed) {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| invalid(e.to_string()))?;

    let opts = MineOptions {
        min_frequency: args.min_frequency.or(section.min_frequency).unwrap_or(1),
        drop_case_only: args.drop_case_only.or(section.drop_case_only).unwrap_or(true),
        workers: workers.or(section.workers).unwrap_or(4),
    };

    let (dictionary, summary) = mine_dictionary(&cfg, &opts).map_err(|e| {
        // Configuration problems exit 1; network/parse failures exit 2.
        match &e {
            wikityper::pipeline::PipelineError::Ingest(IngestError::Config(_)) => {
                invalid(e.to_string())
            }
            _ => anyhow::Error::new(e),
        }
    })?;

    log::info!(
        "mined {} entries from {} pages ({} pairs, {} parse errors, {} network requests, {} cache hits)",
        dictionary.total_entries(),
        summary.ingest.pages_processed,
        summary.pairs_mined,
        summary.ingest.parse_errors,
        summary.ingest.network_requests,
        summary.ingest.cache_hits,
    );

    let out_dir = out_dir_of(&out).to_path_buf();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut file_out = std::fs::File::create(&out)
        .with_context(|| format!("writing {}", out.display()))?;
    dictionary.write_tsv(&mut file_out)?;

    let snapshot = json!({
        "lang": language.code(),
        "pages": cfg.page_budget,
        "revs_per_page": cfg.revisions_per_page,
        "source": match cfg.source { IngestSource::Api => "api", IngestSource::Dump => "dump" },
        "dump_path": cfg.dump_path,
        "cache_dir": cfg.cache_dir,
        "rate_limit": cfg.rate_limit,
        "min_frequency": opts.min_frequency,
        "drop_case_only": opts.drop_case_only,
        "workers": opts.workers,
        "seed": cfg.seed,
        "out": out,
        "summary": summary,
    });
    let inputs: Vec<&std::path::Path> = cfg.dump_path.iter().map(|p| p.as_path()).collect();
    RunManifest::new("mine", snapshot, cfg.seed, &inputs)?.write(&out_dir)?;
    Ok(())
}
