//! End-to-end mining pipeline: fetch revision pairs, strip markup, diff
//! revisions into typo candidates across a worker pool, and merge the
//! shards into one dictionary. Output is identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::typo_mining::{MiningError, TypoDictionary};
use crate::wiki_ingest::{
    fetch_random_pages, strip_markup, IngestConfig, IngestError, IngestSummary, RevisionPair,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Mining(#[from] MiningError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MineOptions {
    /// Drop entries observed fewer than this many times.
    pub min_frequency: u32,
    /// Drop pairs differing only in letter case.
    pub drop_case_only: bool,
    /// Worker threads for diffing; does not affect the result.
    pub workers: usize,
}

impl Default for MineOptions {
    fn default() -> MineOptions {
        MineOptions {
            min_frequency: 1,
            drop_case_only: true,
            workers: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineSummary {
    pub ingest: IngestSummary,
    pub pairs_mined: u64,
    pub entries_before_filters: u64,
    pub entries_after_filters: u64,
}

/// Mine one revision pair after markup stripping.
pub fn mine_stripped_pair(pair: &RevisionPair) -> Vec<crate::typo_mining::TypoEntry> {
    let stripped = RevisionPair {
        older_text: strip_markup(&pair.older_text),
        newer_text: strip_markup(&pair.newer_text),
        ..pair.clone()
    };
    crate::typo_mining::mine_pair(&stripped)
}

/// Diff a batch of revision pairs into a dictionary, sharding the work over
/// `workers` threads. Shards are merged in order, and the dictionary merge is
/// associative and commutative, so the result does not depend on scheduling.
pub fn mine_pairs(
    pairs: &[RevisionPair],
    language: crate::textcore::Language,
    workers: usize,
) -> Result<TypoDictionary, MiningError> {
    let workers = workers.max(1);
    let mut dictionary = TypoDictionary::empty(language);
    if pairs.is_empty() {
        return Ok(dictionary);
    }
    let chunk_size = pairs.len().div_ceil(workers);
    let shards: Vec<TypoDictionary> = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    let entries = chunk.iter().flat_map(|p| mine_stripped_pair(p));
                    crate::typo_mining::build_dictionary(entries, language)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("mining worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    for shard in shards {
        dictionary.merge(shard)?;
    }
    Ok(dictionary)
}

/// Fetch pages per `cfg` and mine them into a typo dictionary.
pub fn mine_dictionary(
    cfg: &IngestConfig,
    opts: &MineOptions,
) -> Result<(TypoDictionary, MineSummary), PipelineError> {
    let (pairs, ingest) = fetch_random_pages(cfg)?;
    let mut summary = MineSummary {
        ingest,
        pairs_mined: pairs.len() as u64,
        ..MineSummary::default()
    };
    let mut dictionary = mine_pairs(&pairs, cfg.language, opts.workers)?;
    summary.entries_before_filters = dictionary.total_entries() as u64;
    if opts.drop_case_only {
        dictionary.drop_case_only();
    }
    if opts.min_frequency > 1 {
        dictionary.apply_min_frequency(opts.min_frequency);
    }
    summary.entries_after_filters = dictionary.total_entries() as u64;
    Ok((dictionary, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcore::Language;

    fn pair(page_id: u64, older: &str, newer: &str) -> RevisionPair {
        RevisionPair {
            page_id,
            page_title: format!("Page {page_id}"),
            older_rev_id: page_id * 10,
            newer_rev_id: page_id * 10 + 1,
            older_text: older.to_string(),
            newer_text: newer.to_string(),
            language: Language::En,
        }
    }

    #[test]
    fn markup_is_stripped_before_diffing() {
        // The template churn must not surface as typo candidates.
        let p = pair(
            1,
            "{{Infobox|year=1990}} the goverment dates",
            "{{Infobox|year=1991}} the government dates",
        );
        let entries = mine_stripped_pair(&p);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].misspelled, "goverment");
        assert_eq!(entries[0].correct, "government");
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let pairs: Vec<RevisionPair> = (0..20)
            .map(|i| {
                pair(
                    i,
                    &format!("word{i} thw example"),
                    &format!("word{i} the example"),
                )
            })
            .collect();
        let one = mine_pairs(&pairs, Language::En, 1).unwrap();
        let four = mine_pairs(&pairs, Language::En, 4).unwrap();
        let nine = mine_pairs(&pairs, Language::En, 9).unwrap();
        assert_eq!(one, four);
        assert_eq!(four, nine);
    }
}
