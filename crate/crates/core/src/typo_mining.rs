//! Diff revision pairs into added/removed word multisets and extract
//! typo -> correction pairs under the three mining filters: edit distance
//! exactly 1, letters only, at least two characters.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::textcore::{is_dictionary_eligible, levenshtein, tokenize, Language};
use crate::wiki_ingest::RevisionPair;

/// Word counts keyed by surface. Deterministic iteration order.
pub type WordMultiset = BTreeMap<String, usize>;

#[derive(Debug, thiserror::Error)]
pub enum MiningError {
    #[error("dictionary language mismatch: expected {expected}, found entry in {found}")]
    MixedLanguages { expected: Language, found: Language },
    #[error("invalid typo entry ({misspelled:?} -> {correct:?}): {reason}")]
    InvalidEntry {
        misspelled: String,
        correct: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A mined (misspelled, correct) pair with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypoEntry {
    pub misspelled: String,
    pub correct: String,
    pub language: Language,
    pub frequency: u32,
    /// (page_id, newer_rev_id) of each revision pair the typo was mined from.
    #[serde(default)]
    pub sources: Vec<(u64, u64)>,
}

impl TypoEntry {
    pub fn validate(&self) -> Result<(), MiningError> {
        let fail = |reason: &str| MiningError::InvalidEntry {
            misspelled: self.misspelled.clone(),
            correct: self.correct.clone(),
            reason: reason.to_string(),
        };
        if self.misspelled == self.correct {
            return Err(fail("misspelled equals correct"));
        }
        if !is_dictionary_eligible(&self.misspelled) || !is_dictionary_eligible(&self.correct) {
            return Err(fail("surface is not dictionary-eligible"));
        }
        if levenshtein(&self.misspelled, &self.correct) != 1 {
            return Err(fail("edit distance is not 1"));
        }
        if self.frequency == 0 {
            return Err(fail("frequency must be positive"));
        }
        Ok(())
    }

    /// True when the two surfaces differ only in letter case.
    pub fn is_case_only(&self) -> bool {
        self.misspelled.to_lowercase() == self.correct.to_lowercase()
    }
}

fn counts(text: &str) -> WordMultiset {
    let mut m = WordMultiset::new();
    for tok in tokenize(text).tokens {
        *m.entry(tok).or_insert(0) += 1;
    }
    m
}

/// Words whose count decreased (removed) or increased (added) between the
/// older and newer revision text, with multiplicity differences.
pub fn diff_words(pair: &RevisionPair) -> (WordMultiset, WordMultiset) {
    diff_word_counts(&pair.older_text, &pair.newer_text)
}

pub fn diff_word_counts(older: &str, newer: &str) -> (WordMultiset, WordMultiset) {
    let old_counts = counts(older);
    let new_counts = counts(newer);
    let mut removed = WordMultiset::new();
    let mut added = WordMultiset::new();
    for (word, &n_old) in &old_counts {
        let n_new = new_counts.get(word).copied().unwrap_or(0);
        if n_old > n_new {
            removed.insert(word.clone(), n_old - n_new);
        }
    }
    for (word, &n_new) in &new_counts {
        let n_old = old_counts.get(word).copied().unwrap_or(0);
        if n_new > n_old {
            added.insert(word.clone(), n_new - n_old);
        }
    }
    (removed, added)
}

/// Pair each removed word with at most one added word: both surfaces must be
/// dictionary-eligible and at edit distance exactly 1. Ties between equally
/// valid added candidates break to the lexicographically smallest.
pub fn extract_pairs(
    removed: &WordMultiset,
    added: &WordMultiset,
    language: Language,
) -> Vec<TypoEntry> {
    let mut out = Vec::new();
    for misspelled in removed.keys() {
        if !is_dictionary_eligible(misspelled) {
            continue;
        }
        // BTreeMap iterates in sorted order, so the first hit is the
        // lexicographically smallest candidate.
        let correct = added.keys().find(|cand| {
            *cand != misspelled
                && is_dictionary_eligible(cand)
                && levenshtein(misspelled, cand) == 1
        });
        if let Some(correct) = correct {
            out.push(TypoEntry {
                misspelled: misspelled.clone(),
                correct: correct.clone(),
                language,
                frequency: 1,
                sources: Vec::new(),
            });
        }
    }
    out
}

/// Mine one revision pair end to end, attaching provenance.
pub fn mine_pair(pair: &RevisionPair) -> Vec<TypoEntry> {
    let (removed, added) = diff_words(pair);
    let mut entries = extract_pairs(&removed, &added, pair.language);
    for e in &mut entries {
        e.sources = vec![(pair.page_id, pair.newer_rev_id)];
    }
    entries
}

/// Per-language collection of mined typos, keyed by correct surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypoDictionary {
    language: Language,
    entries: BTreeMap<String, Vec<TypoEntry>>,
    total_entries: usize,
}

impl TypoDictionary {
    pub fn empty(language: Language) -> TypoDictionary {
        TypoDictionary {
            language,
            entries: BTreeMap::new(),
            total_entries: 0,
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn total_entries(&self) -> usize {
        self.total_entries
    }

    pub fn is_empty(&self) -> bool {
        self.total_entries == 0
    }

    /// Misspellings recorded for a correct surface, sorted by misspelled form.
    pub fn lookup(&self, correct: &str) -> Option<&[TypoEntry]> {
        self.entries.get(correct).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TypoEntry> {
        self.entries.values().flatten()
    }

    fn insert(&mut self, entry: TypoEntry) -> Result<(), MiningError> {
        if entry.language != self.language {
            return Err(MiningError::MixedLanguages {
                expected: self.language,
                found: entry.language,
            });
        }
        entry.validate()?;
        let bucket = self.entries.entry(entry.correct.clone()).or_default();
        match bucket.iter_mut().find(|e| e.misspelled == entry.misspelled) {
            Some(existing) => {
                existing.frequency += entry.frequency;
                existing.sources.extend(entry.sources);
                existing.sources.sort_unstable();
                existing.sources.dedup();
            }
            None => {
                let idx = bucket
                    .binary_search_by(|e| e.misspelled.cmp(&entry.misspelled))
                    .unwrap_err();
                bucket.insert(idx, entry);
                self.total_entries += 1;
            }
        }
        Ok(())
    }

    /// Merge another dictionary in. Associative and commutative, so parallel
    /// mining shards merged in any order yield identical dictionaries.
    pub fn merge(&mut self, other: TypoDictionary) -> Result<(), MiningError> {
        for bucket in other.entries.into_values() {
            for entry in bucket {
                self.insert(entry)?;
            }
        }
        Ok(())
    }

    /// Drop entries mined fewer than `min_frequency` times.
    pub fn apply_min_frequency(&mut self, min_frequency: u32) {
        for bucket in self.entries.values_mut() {
            bucket.retain(|e| e.frequency >= min_frequency);
        }
        self.entries.retain(|_, bucket| !bucket.is_empty());
        self.total_entries = self.entries.values().map(Vec::len).sum();
    }

    /// Drop pairs that differ only in letter case.
    pub fn drop_case_only(&mut self) {
        for bucket in self.entries.values_mut() {
            bucket.retain(|e| !e.is_case_only());
        }
        self.entries.retain(|_, bucket| !bucket.is_empty());
        self.total_entries = self.entries.values().map(Vec::len).sum();
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<(), MiningError> {
        w.write_all(b"language\tmisspelled\tcorrect\tfrequency\n")?;
        for entry in self.iter() {
            // Eligible surfaces cannot contain tabs, so no quoting is needed.
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                entry.language, entry.misspelled, entry.correct, entry.frequency
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R, language: Language) -> Result<TypoDictionary, MiningError> {
        let mut dict = TypoDictionary::empty(language);
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line != "language\tmisspelled\tcorrect\tfrequency" {
                    return Err(MiningError::Parse {
                        line: 1,
                        message: format!("unexpected TSV header {line:?}"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(MiningError::Parse {
                    line: i + 1,
                    message: format!("expected 4 tab-separated fields, got {}", fields.len()),
                });
            }
            let entry_lang: Language = fields[0].parse().map_err(|e| MiningError::Parse {
                line: i + 1,
                message: format!("{e}"),
            })?;
            let frequency: u32 = fields[3].parse().map_err(|_| MiningError::Parse {
                line: i + 1,
                message: format!("invalid frequency {:?}", fields[3]),
            })?;
            dict.insert(TypoEntry {
                misspelled: fields[1].to_string(),
                correct: fields[2].to_string(),
                language: entry_lang,
                frequency,
                sources: Vec::new(),
            })?;
        }
        Ok(dict)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), MiningError> {
        for entry in self.iter() {
            serde_json::to_writer(&mut w, entry)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, language: Language) -> Result<TypoDictionary, MiningError> {
        let mut dict = TypoDictionary::empty(language);
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let entry: TypoEntry = serde_json::from_str(&line).map_err(|e| MiningError::Parse {
                line: i + 1,
                message: format!("{e}"),
            })?;
            dict.insert(entry)?;
        }
        Ok(dict)
    }
}

/// Aggregate a stream of mined entries into a dictionary. Duplicate
/// (misspelled, correct) pairs collapse into frequency counts; all entries
/// must share one language.
pub fn build_dictionary(
    entries: impl IntoIterator<Item = TypoEntry>,
    language: Language,
) -> Result<TypoDictionary, MiningError> {
    let mut dict = TypoDictionary::empty(language);
    for entry in entries {
        dict.insert(entry)?;
    }
    Ok(dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(misspelled: &str, correct: &str) -> TypoEntry {
        TypoEntry {
            misspelled: misspelled.to_string(),
            correct: correct.to_string(),
            language: Language::En,
            frequency: 1,
            sources: Vec::new(),
        }
    }

    #[test]
    fn diff_counts_basic() {
        let (removed, added) = diff_word_counts("the teh cat", "the the cat");
        assert_eq!(removed, WordMultiset::from([("teh".to_string(), 1)]));
        assert_eq!(added, WordMultiset::from([("the".to_string(), 1)]));
    }

    #[test]
    fn diff_identical_texts_is_empty() {
        let (removed, added) = diff_word_counts("same text here", "same text here");
        assert!(removed.is_empty());
        assert!(added.is_empty());
    }

    #[test]
    fn diff_pure_insertion() {
        let (removed, added) = diff_word_counts("a b", "a b c d");
        assert!(removed.is_empty());
        assert_eq!(
            added,
            WordMultiset::from([("c".to_string(), 1), ("d".to_string(), 1)])
        );
    }

    #[test]
    fn extract_accepts_distance_one_pair() {
        let removed = WordMultiset::from([("thw".to_string(), 1)]);
        let added = WordMultiset::from([("the".to_string(), 1)]);
        let pairs = extract_pairs(&removed, &added, Language::En);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].misspelled, "thw");
        assert_eq!(pairs[0].correct, "the");
    }

    #[test]
    fn extract_rejects_digits_and_short_words() {
        let removed = WordMultiset::from([("cat5".to_string(), 1)]);
        let added = WordMultiset::from([("cats".to_string(), 1)]);
        assert!(extract_pairs(&removed, &added, Language::En).is_empty());

        let removed = WordMultiset::from([("a".to_string(), 1)]);
        let added = WordMultiset::from([("b".to_string(), 1)]);
        assert!(extract_pairs(&removed, &added, Language::En).is_empty());
    }

    #[test]
    fn extract_rejects_distance_two() {
        let removed = WordMultiset::from([("wrod".to_string(), 1)]);
        let added = WordMultiset::from([("word".to_string(), 1)]);
        assert!(extract_pairs(&removed, &added, Language::En).is_empty());
    }

    #[test]
    fn extract_tie_breaks_lexicographically() {
        // "cet" is distance 1 from both "cat" and "cut"; smallest wins.
        let removed = WordMultiset::from([("cet".to_string(), 1)]);
        let added = WordMultiset::from([("cut".to_string(), 1), ("cat".to_string(), 1)]);
        let pairs = extract_pairs(&removed, &added, Language::En);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].correct, "cat");
    }

    #[test]
    fn build_aggregates_duplicates() {
        let dict = build_dictionary(
            [entry("thw", "the"), entry("thw", "the"), entry("tge", "the")],
            Language::En,
        )
        .unwrap();
        assert_eq!(dict.total_entries(), 2);
        let bucket = dict.lookup("the").unwrap();
        assert_eq!(bucket.len(), 2);
        assert_eq!(bucket[0].misspelled, "tge");
        assert_eq!(bucket[0].frequency, 1);
        assert_eq!(bucket[1].misspelled, "thw");
        assert_eq!(bucket[1].frequency, 2);
    }

    #[test]
    fn build_empty_is_empty() {
        let dict = build_dictionary([], Language::En).unwrap();
        assert_eq!(dict.total_entries(), 0);
        assert!(dict.is_empty());
    }

    #[test]
    fn build_rejects_mixed_languages() {
        let mut de = entry("dis", "das");
        de.language = Language::De;
        let err = build_dictionary([entry("thw", "the"), de], Language::En).unwrap_err();
        assert!(matches!(err, MiningError::MixedLanguages { .. }));
    }

    #[test]
    fn build_rejects_invalid_entry() {
        let err = build_dictionary([entry("word", "sword5")], Language::En).unwrap_err();
        assert!(matches!(err, MiningError::InvalidEntry { .. }));
    }

    #[test]
    fn tsv_round_trip() {
        let dict = build_dictionary(
            [entry("thw", "the"), entry("thw", "the"), entry("tge", "the")],
            Language::En,
        )
        .unwrap();
        let mut buf = Vec::new();
        dict.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("language\tmisspelled\tcorrect\tfrequency\n"));
        let loaded = TypoDictionary::read_tsv(&buf[..], Language::En).unwrap();
        assert_eq!(loaded.total_entries(), dict.total_entries());
        assert_eq!(loaded.lookup("the").unwrap()[1].frequency, 2);
    }

    #[test]
    fn jsonl_round_trip_keeps_sources() {
        let mut e = entry("thw", "the");
        e.sources = vec![(7, 42)];
        let dict = build_dictionary([e], Language::En).unwrap();
        let mut buf = Vec::new();
        dict.write_jsonl(&mut buf).unwrap();
        let loaded = TypoDictionary::read_jsonl(&buf[..], Language::En).unwrap();
        assert_eq!(loaded.lookup("the").unwrap()[0].sources, vec![(7, 42)]);
    }

    #[test]
    fn tsv_load_revalidates_entries() {
        let bad = b"language\tmisspelled\tcorrect\tfrequency\nen\twrod\tword\t1\n";
        let err = TypoDictionary::read_tsv(&bad[..], Language::En).unwrap_err();
        assert!(matches!(err, MiningError::InvalidEntry { .. }));
    }

    #[test]
    fn min_frequency_and_case_filters() {
        let mut dict = build_dictionary(
            [
                entry("thw", "the"),
                entry("thw", "the"),
                entry("tge", "the"),
                entry("word", "Word"),
            ],
            Language::En,
        )
        .unwrap();
        dict.drop_case_only();
        assert_eq!(dict.total_entries(), 2);
        dict.apply_min_frequency(2);
        assert_eq!(dict.total_entries(), 1);
        assert_eq!(dict.lookup("the").unwrap()[0].misspelled, "thw");
    }

    proptest! {
        #[test]
        fn diff_is_antisymmetric(older in "[a-c ]{0,30}", newer in "[a-c ]{0,30}") {
            let (r1, a1) = diff_word_counts(&older, &newer);
            let (r2, a2) = diff_word_counts(&newer, &older);
            prop_assert_eq!(r1, a2);
            prop_assert_eq!(a1, r2);
        }

        #[test]
        fn merge_order_is_irrelevant(
            words in proptest::collection::vec(("[a-d]{2,4}", 0u8..3), 1..12),
        ) {
            let entries: Vec<TypoEntry> = words
                .iter()
                .filter_map(|(w, edit)| {
                    // Derive a valid distance-1 partner by appending a letter.
                    let correct = format!("{w}{}", (b'a' + edit) as char);
                    let e = entry(w, &correct);
                    e.validate().ok().map(|_| e)
                })
                .collect();
            prop_assume!(!entries.is_empty());
            let forward = build_dictionary(entries.clone(), Language::En).unwrap();
            let mut reversed_entries = entries.clone();
            reversed_entries.reverse();
            let reversed = build_dictionary(reversed_entries, Language::En).unwrap();
            prop_assert_eq!(&forward, &reversed);

            // Sharded merge equals sequential build.
            let mid = entries.len() / 2;
            let mut left = build_dictionary(entries[..mid].to_vec(), Language::En).unwrap();
            let right = build_dictionary(entries[mid..].to_vec(), Language::En).unwrap();
            left.merge(right).unwrap();
            prop_assert_eq!(&forward, &left);
            prop_assert!(forward.total_entries() <= entries.len());
        }
    }
}
