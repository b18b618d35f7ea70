//! Unicode-aware tokenization, word validation, and edit-distance primitives
//! shared by the mining, injection, and statistics modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Language editions covered by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    Es,
    Fr,
    Hi,
    Tr,
}

impl Language {
    pub const ALL: [Language; 6] = [
        Language::En,
        Language::De,
        Language::Es,
        Language::Fr,
        Language::Hi,
        Language::Tr,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Es => "es",
            Language::Fr => "fr",
            Language::Hi => "hi",
            Language::Tr => "tr",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language code {0:?} (expected one of en, de, es, fr, hi, tr)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "es" => Ok(Language::Es),
            "fr" => Ok(Language::Fr),
            "hi" => Ok(Language::Hi),
            "tr" => Ok(Language::Tr),
            other => Err(UnknownLanguage(other.to_string())),
        }
    }
}

/// A single surface form tied to a language edition. Surface is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    surface: String,
    language: Language,
}

impl Word {
    pub fn new(surface: impl Into<String>, language: Language) -> Option<Word> {
        let surface = surface.into();
        if surface.is_empty() {
            return None;
        }
        Some(Word { surface, language })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// True iff the word may enter a typo dictionary: every character is a
    /// Unicode letter and there are at least two of them.
    pub fn is_dictionary_eligible(&self) -> bool {
        is_dictionary_eligible(&self.surface)
    }
}

/// Letters-only, length >= 2. Digits, punctuation, symbols, and combining
/// marks all disqualify a word.
pub fn is_dictionary_eligible(surface: &str) -> bool {
    let mut count = 0usize;
    for ch in surface.chars() {
        if !ch.is_alphabetic() {
            return false;
        }
        count += 1;
    }
    count >= 2
}

/// Whitespace-tokenized sentence. Joining with single spaces round-trips
/// tokenization for whitespace-normalized input.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedSentence {
    pub tokens: Vec<String>,
}

impl TokenizedSentence {
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Split on Unicode whitespace runs. No punctuation splitting: the pipeline
/// replaces whole words and punctuation-attached tokens simply fail
/// dictionary eligibility.
pub fn tokenize(text: &str) -> TokenizedSentence {
    TokenizedSentence {
        tokens: text.split_whitespace().map(str::to_owned).collect(),
    }
}

/// Character-level Levenshtein distance over NFC-normalized code points.
/// Insertions, deletions, and substitutions cost 1; a transposition costs 2.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.nfc().collect();
    let b: Vec<char> = b.nfc().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // Two-row DP, iterating rows over `a`.
    let mut cur: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = cur[0];
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let tmp = cur[j + 1];
            let sub = prev_diag + usize::from(ca != cb);
            cur[j + 1] = sub.min(tmp + 1).min(cur[j] + 1);
            prev_diag = tmp;
        }
    }
    cur[b.len()]
}
