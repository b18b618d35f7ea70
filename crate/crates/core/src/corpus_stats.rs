//! Dataset and dictionary statistics: token counts, realized noise ratios,
//! and part-of-speech histograms over externally tagged noise tokens.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetRecord;
use crate::noise_injection::InjectionReport;
use crate::round::{round2, round_half_up};
use crate::textcore::{tokenize, Language};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-(dataset, language) token and noise counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub language: Language,
    pub dataset: String,
    pub n_records: u64,
    pub n_tokens: u64,
    /// Rounded to the nearest whole token.
    pub avg_tokens_per_record: u64,
    pub n_noise: u64,
    /// Raw replacement ratio, before presentation rounding.
    pub noise_ratio_raw: f64,
    /// Ratio rounded to two decimals, as presented.
    pub noise_ratio: f64,
}

fn record_token_count(record: &DatasetRecord) -> u64 {
    match record {
        DatasetRecord::Ic { text, .. } => tokenize(text).len() as u64,
        DatasetRecord::Nli {
            premise,
            hypothesis,
            ..
        } => (tokenize(premise).len() + tokenize(hypothesis).len()) as u64,
        DatasetRecord::Ner { tokens, .. } => tokens.len() as u64,
    }
}

/// Compute presentation statistics for a clean dataset and the injection
/// report produced from it.
pub fn compute_stats(
    clean: &[DatasetRecord],
    dataset: &str,
    language: Language,
    report: &InjectionReport,
) -> CorpusStats {
    let n_records = clean.len() as u64;
    let n_tokens: u64 = clean.iter().map(record_token_count).sum();
    let n_noise = report.replacements_made;
    let (avg, raw, rounded) = if n_tokens == 0 {
        (0, 0.0, 0.0)
    } else {
        let raw = n_noise as f64 / n_tokens as f64;
        (
            round_half_up(n_tokens as f64 / n_records as f64),
            raw,
            round2(raw),
        )
    };
    CorpusStats {
        language,
        dataset: dataset.to_string(),
        n_records,
        n_tokens,
        avg_tokens_per_record: avg,
        n_noise,
        noise_ratio_raw: raw,
        noise_ratio: rounded,
    }
}

/// The noise ratio as presented: replacements over tokens, two decimals.
pub fn noise_ratio_2dp(n_noise: u64, n_tokens: u64) -> f64 {
    if n_tokens == 0 {
        0.0
    } else {
        round2(n_noise as f64 / n_tokens as f64)
    }
}

pub const STATS_CSV_HEADER: &str = "dataset,language,#Tokens,Avg #Tokens,#Noise,Noise Ratio";

pub fn write_stats_csv<W: Write>(mut w: W, rows: &[CorpusStats]) -> Result<(), StatsError> {
    writeln!(w, "{STATS_CSV_HEADER}")?;
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{},{:.2}",
            s.dataset, s.language, s.n_tokens, s.avg_tokens_per_record, s.n_noise, s.noise_ratio
        )?;
    }
    Ok(())
}

pub fn write_stats_json<W: Write>(mut w: W, rows: &[CorpusStats]) -> Result<(), StatsError> {
    let json = serde_json::to_string_pretty(rows).expect("stats serialize");
    writeln!(w, "{json}")?;
    Ok(())
}

/// The universal PoS tag set used for the noise-distribution histogram.
pub const UNIVERSAL_POS_TAGS: [&str; 16] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosHistogram {
    pub counts: BTreeMap<String, u64>,
    pub malformed_lines: u64,
    pub total_lines: u64,
}

/// Count tags from a two-column `token<TAB>pos_tag` TSV produced by an
/// external tagger over replaced positions. Tags outside the universal set
/// land in "Other"; malformed lines are skipped and counted.
pub fn pos_histogram<R: BufRead>(r: R) -> Result<PosHistogram, StatsError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut malformed = 0u64;
    let mut total = 0u64;
    for line in r.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        total += 1;
        let Some((_token, tag)) = line.split_once('\t') else {
            malformed += 1;
            continue;
        };
        let tag = tag.trim();
        if tag.is_empty() {
            malformed += 1;
            continue;
        }
        let key = if UNIVERSAL_POS_TAGS.contains(&tag) {
            tag.to_string()
        } else {
            "Other".to_string()
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    Ok(PosHistogram {
        counts,
        malformed_lines: malformed,
        total_lines: total,
    })
}

pub fn write_pos_csv<W: Write>(mut w: W, hist: &PosHistogram) -> Result<(), StatsError> {
    writeln!(w, "pos,count")?;
    for (tag, count) in &hist.counts {
        writeln!(w, "{tag},{count}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_injection::InjectionReport;

    fn report(tokens: u64, noise: u64) -> InjectionReport {
        InjectionReport {
            records_processed: 1,
            records_rejected: 0,
            rejected_indices: vec![],
            tokens_total: tokens,
            replacements_made: noise,
            noise_ratio: if tokens == 0 {
                0.0
            } else {
                noise as f64 / tokens as f64
            },
            per_record_replacements: BTreeMap::new(),
        }
    }

    #[test]
    fn xnli_en_ratio() {
        assert_eq!(noise_ratio_2dp(19269, 137850), 0.14);
    }

    #[test]
    fn snips_en_ratio() {
        assert_eq!(noise_ratio_2dp(1822, 13159), 0.14);
    }

    #[test]
    fn empty_dataset_yields_zeros() {
        let stats = compute_stats(&[], "xnli", Language::En, &report(0, 0));
        assert_eq!(stats.n_tokens, 0);
        assert_eq!(stats.noise_ratio, 0.0);
        assert_eq!(stats.avg_tokens_per_record, 0);
    }

    #[test]
    fn stats_count_both_nli_sides() {
        let records = vec![DatasetRecord::Nli {
            premise: "one two three".into(),
            hypothesis: "four five".into(),
            label: "neutral".into(),
        }];
        let stats = compute_stats(&records, "xnli", Language::En, &report(5, 1));
        assert_eq!(stats.n_tokens, 5);
        assert_eq!(stats.avg_tokens_per_record, 5);
        assert_eq!(stats.noise_ratio, 0.2);
    }

    #[test]
    fn pos_histogram_counts() {
        let input = "ran\tVERB\ndog\tNOUN\ndog\tNOUN\n";
        let hist = pos_histogram(input.as_bytes()).unwrap();
        assert_eq!(hist.counts["VERB"], 1);
        assert_eq!(hist.counts["NOUN"], 2);
        assert_eq!(hist.malformed_lines, 0);
    }

    #[test]
    fn pos_histogram_empty_input() {
        let hist = pos_histogram("".as_bytes()).unwrap();
        assert!(hist.counts.is_empty());
        assert_eq!(hist.total_lines, 0);
    }

    #[test]
    fn pos_histogram_other_bucket_and_malformed() {
        let input = "w\tXYZ\nbroken line\nx\tNOUN\n";
        let hist = pos_histogram(input.as_bytes()).unwrap();
        assert_eq!(hist.counts["Other"], 1);
        assert_eq!(hist.counts["NOUN"], 1);
        assert_eq!(hist.malformed_lines, 1);
        let counted: u64 = hist.counts.values().sum();
        assert_eq!(counted, hist.total_lines - hist.malformed_lines);
    }

    #[test]
    fn stats_csv_shape() {
        let stats = compute_stats(
            &[DatasetRecord::Ic {
                text: "find me a movie".into(),
                label: "x".into(),
            }],
            "snips",
            Language::En,
            &report(4, 1),
        );
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &[stats]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "dataset,language,#Tokens,Avg #Tokens,#Noise,Noise Ratio\nsnips,en,4,4,1,0.25\n"
        );
    }
}
