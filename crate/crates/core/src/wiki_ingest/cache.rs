//! On-disk revision cache: one gzip-compressed text file per revision plus a
//! JSON index per language, so interrupted mining runs resume without
//! re-fetching.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::{IngestError, PageRevisions, Revision};
use crate::textcore::Language;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CacheIndex {
    /// page_id -> cached page metadata; BTreeMap keeps the file diffable.
    pages: BTreeMap<u64, PageMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PageMeta {
    title: String,
    rev_ids: Vec<u64>,
}

pub struct RevisionCache {
    root: PathBuf,
    language: Language,
    index: CacheIndex,
}

impl RevisionCache {
    pub fn open(dir: &Path, language: Language) -> Result<RevisionCache, IngestError> {
        let root = dir.join(language.code());
        fs::create_dir_all(&root)?;
        let index_path = root.join("index.json");
        let index = if index_path.exists() {
            let text = fs::read_to_string(&index_path)?;
            serde_json::from_str(&text)
                .map_err(|e| IngestError::Cache(format!("corrupt index {index_path:?}: {e}")))?
        } else {
            CacheIndex::default()
        };
        Ok(RevisionCache {
            root,
            language,
            index,
        })
    }

    fn rev_path(&self, page_id: u64, rev_id: u64) -> PathBuf {
        self.root
            .join("revs")
            .join(page_id.to_string())
            .join(format!("{rev_id}.txt.gz"))
    }

    /// Page ids with a complete set of cached revision texts, ascending.
    pub fn complete_pages(&self) -> Vec<u64> {
        self.index
            .pages
            .iter()
            .filter(|(page_id, meta)| {
                meta.rev_ids
                    .iter()
                    .all(|rev_id| self.rev_path(**page_id, *rev_id).exists())
            })
            .map(|(page_id, _)| *page_id)
            .collect()
    }

    pub fn load_page(&self, page_id: u64) -> Result<Option<PageRevisions>, IngestError> {
        let Some(meta) = self.index.pages.get(&page_id) else {
            return Ok(None);
        };
        let mut revisions = Vec::with_capacity(meta.rev_ids.len());
        for &rev_id in &meta.rev_ids {
            let path = self.rev_path(page_id, rev_id);
            if !path.exists() {
                return Ok(None);
            }
            let mut text = String::new();
            GzDecoder::new(fs::File::open(path)?).read_to_string(&mut text)?;
            revisions.push(Revision { id: rev_id, text });
        }
        Ok(Some(PageRevisions {
            page_id,
            title: meta.title.clone(),
            revisions,
        }))
    }

    pub fn store_page(&mut self, page: &PageRevisions) -> Result<(), IngestError> {
        let dir = self.root.join("revs").join(page.page_id.to_string());
        fs::create_dir_all(&dir)?;
        for rev in &page.revisions {
            let path = self.rev_path(page.page_id, rev.id);
            let mut encoder = GzEncoder::new(fs::File::create(path)?, Compression::default());
            encoder.write_all(rev.text.as_bytes())?;
            encoder.finish()?;
        }
        self.index.pages.insert(
            page.page_id,
            PageMeta {
                title: page.title.clone(),
                rev_ids: page.revisions.iter().map(|r| r.id).collect(),
            },
        );
        self.flush_index()
    }

    fn flush_index(&self) -> Result<(), IngestError> {
        let text = serde_json::to_string_pretty(&self.index).expect("index serializes");
        fs::write(self.root.join("index.json"), text)?;
        Ok(())
    }

    pub fn language(&self) -> Language {
        self.language
    }
}
