//! Apply dictionary-based (WikiTypo) or keyboard-based noise to datasets
//! under the r/m-parameterized selection rule, preserving task structure and
//! gold labels.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{validate_bio, DatasetRecord};
use crate::keyboard_noise::{keyboard_perturb, KeyboardLayout};
use crate::round::round_half_up;
use crate::textcore::{tokenize, Language};
use crate::typo_mining::TypoDictionary;

#[derive(Debug, thiserror::Error)]
pub enum InjectionError {
    #[error("invalid noise config: {0}")]
    InvalidConfig(String),
    #[error("config mode is {config} but a {backend} backend was supplied")]
    ModeMismatch {
        config: NoiseMode,
        backend: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    Dictionary,
    Keyboard,
}

impl std::fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseMode::Dictionary => "dictionary",
            NoiseMode::Keyboard => "keyboard",
        })
    }
}

/// Injection hyperparameters. `ratio_r` is the fraction of a sentence's
/// words to perturb; `max_words_m` caps perturbed words per sentence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub ratio_r: f64,
    pub max_words_m: usize,
    pub mode: NoiseMode,
    pub seed: u64,
    pub language: Language,
    /// Draw among multiple mined misspellings weighted by mined frequency;
    /// false selects uniformly.
    pub frequency_weighted: bool,
}

impl NoiseConfig {
    pub fn new(mode: NoiseMode, language: Language, seed: u64) -> NoiseConfig {
        NoiseConfig {
            ratio_r: 0.2,
            max_words_m: 4,
            mode,
            seed,
            language,
            frequency_weighted: true,
        }
    }

    pub fn validate(&self) -> Result<(), InjectionError> {
        if !(0.0..=1.0).contains(&self.ratio_r) {
            return Err(InjectionError::InvalidConfig(format!(
                "ratio must be in [0,1], got {}",
                self.ratio_r
            )));
        }
        if self.max_words_m == 0 {
            return Err(InjectionError::InvalidConfig(
                "max-words must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// min(m, round_half_up(r * n)), never exceeding n.
pub fn select_replacement_count(n_tokens: usize, cfg: &NoiseConfig) -> usize {
    let target = round_half_up(cfg.ratio_r * n_tokens as f64) as usize;
    target.min(cfg.max_words_m).min(n_tokens)
}

#[derive(Debug, Clone, Copy)]
pub enum NoiseBackend<'a> {
    Dictionary(&'a TypoDictionary),
    Keyboard(&'a KeyboardLayout),
}

/// Run totals for one injection pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionReport {
    pub records_processed: u64,
    pub records_rejected: u64,
    pub rejected_indices: Vec<usize>,
    pub tokens_total: u64,
    pub replacements_made: u64,
    pub noise_ratio: f64,
    /// replacements-per-record -> number of records.
    pub per_record_replacements: BTreeMap<u64, u64>,
}

impl InjectionReport {
    fn new() -> InjectionReport {
        InjectionReport {
            records_processed: 0,
            records_rejected: 0,
            rejected_indices: Vec::new(),
            tokens_total: 0,
            replacements_made: 0,
            noise_ratio: 0.0,
            per_record_replacements: BTreeMap::new(),
        }
    }

    fn finish(&mut self) {
        self.noise_ratio = if self.tokens_total == 0 {
            0.0
        } else {
            self.replacements_made as f64 / self.tokens_total as f64
        };
    }
}

// Splitmix64 step, used to derive independent per-record rng states so the
// output is reproducible regardless of processing order.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rng for one (record, part) slot. Part 0 covers single-text records; NLI
/// uses parts 0 and 1 for premise and hypothesis.
pub fn record_rng(seed: u64, record_index: u64, part: u64) -> ChaCha8Rng {
    let mut state = seed
        ^ record_index.wrapping_mul(0xA076_1D64_78BD_642F)
        ^ part.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Choose `k` distinct values from `pool` uniformly, via partial
/// Fisher-Yates. Output is sorted ascending.
fn sample_positions<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    let mut pool = pool.to_vec();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

fn transfer_casing(original: &str, replacement: &str) -> String {
    match original.chars().next() {
        Some(first) if first.is_uppercase() => {
            let mut chars = replacement.chars();
            match chars.next() {
                Some(head) => head.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        _ => replacement.to_string(),
    }
}

/// Dictionary lookup: exact surface match first, then lowercase fallback.
/// Returns the misspelling bucket and whether casing must be re-applied.
fn dictionary_hit<'d>(
    dict: &'d TypoDictionary,
    token: &str,
) -> Option<(&'d [crate::typo_mining::TypoEntry], bool)> {
    if let Some(bucket) = dict.lookup(token) {
        return Some((bucket, false));
    }
    let lower = token.to_lowercase();
    if lower != token {
        if let Some(bucket) = dict.lookup(&lower) {
            return Some((bucket, true));
        }
    }
    None
}

/// Replace up to the r/m target of tokens with mined misspellings. Only
/// positions with a dictionary entry are eligible.
pub fn inject_sentence<R: Rng>(
    tokens: &[String],
    dict: &TypoDictionary,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> (Vec<String>, Vec<usize>) {
    let eligible: Vec<usize> = (0..tokens.len())
        .filter(|&i| dictionary_hit(dict, &tokens[i]).is_some())
        .collect();
    let target = select_replacement_count(tokens.len(), cfg);
    let chosen = sample_positions(&eligible, target, rng);

    let mut noisy = tokens.to_vec();
    for &pos in &chosen {
        let (bucket, recase) =
            dictionary_hit(dict, &tokens[pos]).expect("eligibility was checked above");
        let entry = if cfg.frequency_weighted {
            let total: u64 = bucket.iter().map(|e| u64::from(e.frequency)).sum();
            let mut pick = rng.gen_range(0..total);
            bucket
                .iter()
                .find(|e| {
                    if pick < u64::from(e.frequency) {
                        true
                    } else {
                        pick -= u64::from(e.frequency);
                        false
                    }
                })
                .expect("pick is below the frequency total")
        } else {
            &bucket[rng.gen_range(0..bucket.len())]
        };
        noisy[pos] = if recase {
            transfer_casing(&tokens[pos], &entry.misspelled)
        } else {
            entry.misspelled.clone()
        };
    }
    (noisy, chosen)
}

/// Same position-selection rule with every alphabetic token of length >= 2
/// eligible; selected tokens go through one keyboard substitution.
pub fn inject_sentence_keyboard<R: Rng>(
    tokens: &[String],
    layout: &KeyboardLayout,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> (Vec<String>, Vec<usize>) {
    let eligible: Vec<usize> = (0..tokens.len())
        .filter(|&i| {
            let t = &tokens[i];
            t.chars().count() >= 2 && t.chars().all(char::is_alphabetic)
        })
        .collect();
    let target = select_replacement_count(tokens.len(), cfg);
    let chosen = sample_positions(&eligible, target, rng);

    let mut noisy = tokens.to_vec();
    for &pos in &chosen {
        noisy[pos] = keyboard_perturb(&tokens[pos], layout, rng);
    }
    (noisy, chosen)
}

fn inject_text<R: Rng>(
    text: &str,
    backend: NoiseBackend<'_>,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> (String, u64, u64) {
    let sentence = tokenize(text);
    let n_tokens = sentence.len() as u64;
    let (noisy, replaced) = match backend {
        NoiseBackend::Dictionary(dict) => inject_sentence(&sentence.tokens, dict, cfg, rng),
        NoiseBackend::Keyboard(layout) => {
            inject_sentence_keyboard(&sentence.tokens, layout, cfg, rng)
        }
    };
    (noisy.join(" "), n_tokens, replaced.len() as u64)
}

/// Noise a whole dataset. Output order equals input order, gold labels are
/// never modified, and per-record rngs make the result independent of any
/// parallel execution order. NER records with misaligned or invalid BIO
/// labels pass through unchanged and are counted as rejected.
pub fn inject_dataset(
    records: &[DatasetRecord],
    cfg: &NoiseConfig,
    backend: NoiseBackend<'_>,
) -> Result<(Vec<DatasetRecord>, InjectionReport), InjectionError> {
    cfg.validate()?;
    match (cfg.mode, backend) {
        (NoiseMode::Dictionary, NoiseBackend::Dictionary(_)) => {}
        (NoiseMode::Keyboard, NoiseBackend::Keyboard(_)) => {}
        (mode, NoiseBackend::Dictionary(_)) => {
            return Err(InjectionError::ModeMismatch {
                config: mode,
                backend: "dictionary",
            })
        }
        (mode, NoiseBackend::Keyboard(_)) => {
            return Err(InjectionError::ModeMismatch {
                config: mode,
                backend: "keyboard",
            })
        }
    }

    let mut report = InjectionReport::new();
    let mut out = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let mut replaced_here = 0u64;
        let noisy = match record {
            DatasetRecord::Ic { text, label } => {
                let mut rng = record_rng(cfg.seed, index as u64, 0);
                let (noisy_text, n_tokens, replaced) = inject_text(text, backend, cfg, &mut rng);
                report.tokens_total += n_tokens;
                replaced_here += replaced;
                DatasetRecord::Ic {
                    text: noisy_text,
                    label: label.clone(),
                }
            }
            DatasetRecord::Nli {
                premise,
                hypothesis,
                label,
            } => {
                let mut premise_rng = record_rng(cfg.seed, index as u64, 0);
                let mut hypothesis_rng = record_rng(cfg.seed, index as u64, 1);
                let (noisy_premise, np, rp) = inject_text(premise, backend, cfg, &mut premise_rng);
                let (noisy_hypothesis, nh, rh) =
                    inject_text(hypothesis, backend, cfg, &mut hypothesis_rng);
                report.tokens_total += np + nh;
                replaced_here += rp + rh;
                DatasetRecord::Nli {
                    premise: noisy_premise,
                    hypothesis: noisy_hypothesis,
                    label: label.clone(),
                }
            }
            DatasetRecord::Ner { tokens, labels } => {
                if tokens.len() != labels.len() || validate_bio(labels).is_err() {
                    report.records_rejected += 1;
                    report.rejected_indices.push(index);
                    out.push(record.clone());
                    continue;
                }
                let mut rng = record_rng(cfg.seed, index as u64, 0);
                report.tokens_total += tokens.len() as u64;
                let (noisy_tokens, replaced) = match backend {
                    NoiseBackend::Dictionary(dict) => inject_sentence(tokens, dict, cfg, &mut rng),
                    NoiseBackend::Keyboard(layout) => {
                        inject_sentence_keyboard(tokens, layout, cfg, &mut rng)
                    }
                };
                replaced_here += replaced.len() as u64;
                DatasetRecord::Ner {
                    tokens: noisy_tokens,
                    labels: labels.clone(),
                }
            }
        };
        report.records_processed += 1;
        report.replacements_made += replaced_here;
        *report
            .per_record_replacements
            .entry(replaced_here)
            .or_insert(0) += 1;
        out.push(noisy);
    }
    report.finish();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typo_mining::{build_dictionary, TypoEntry};
    use proptest::prelude::*;

    fn dict(pairs: &[(&str, &str)]) -> TypoDictionary {
        build_dictionary(
            pairs.iter().map(|(m, c)| TypoEntry {
                misspelled: m.to_string(),
                correct: c.to_string(),
                language: Language::En,
                frequency: 1,
                sources: Vec::new(),
            }),
            Language::En,
        )
        .unwrap()
    }

    fn cfg(mode: NoiseMode) -> NoiseConfig {
        NoiseConfig::new(mode, Language::En, 7)
    }

    fn strings(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn replacement_count_rule() {
        let c = cfg(NoiseMode::Dictionary);
        assert_eq!(select_replacement_count(10, &c), 2);
        assert_eq!(select_replacement_count(30, &c), 4);
        assert_eq!(select_replacement_count(0, &c), 0);
        // round-half-up: 0.2 * 27 = 5.4 -> 5, capped at 4.
        assert_eq!(select_replacement_count(27, &c), 4);
        // 0.2 * 13 = 2.6 -> 3.
        assert_eq!(select_replacement_count(13, &c), 3);
        let mut half = c.clone();
        half.ratio_r = 0.5;
        half.max_words_m = 100;
        assert_eq!(select_replacement_count(3, &half), 2); // 1.5 rounds up
        assert_eq!(select_replacement_count(1, &half), 1); // 0.5 rounds up
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(NoiseMode::Dictionary);
        c.ratio_r = 1.5;
        assert!(c.validate().is_err());
        c.ratio_r = 0.2;
        c.max_words_m = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_eligible_position_is_replaced() {
        let d = dict(&[("thw", "the")]);
        let mut c = cfg(NoiseMode::Dictionary);
        c.max_words_m = 4;
        c.ratio_r = 1.0;
        let mut rng = record_rng(c.seed, 0, 0);
        let (noisy, replaced) = inject_sentence(&strings(&["the", "cat"]), &d, &c, &mut rng);
        assert_eq!(noisy, strings(&["thw", "cat"]));
        assert_eq!(replaced, vec![0]);
    }

    #[test]
    fn no_dictionary_hits_means_no_change() {
        let d = dict(&[("thw", "the")]);
        let c = cfg(NoiseMode::Dictionary);
        let mut rng = record_rng(c.seed, 0, 0);
        let tokens = strings(&["completely", "different", "words"]);
        let (noisy, replaced) = inject_sentence(&tokens, &d, &c, &mut rng);
        assert_eq!(noisy, tokens);
        assert!(replaced.is_empty());
    }

    #[test]
    fn lowercase_fallback_transfers_casing() {
        let d = dict(&[("thw", "the")]);
        let mut c = cfg(NoiseMode::Dictionary);
        c.ratio_r = 1.0;
        let mut rng = record_rng(c.seed, 0, 0);
        let (noisy, _) = inject_sentence(&strings(&["The"]), &d, &c, &mut rng);
        assert_eq!(noisy, strings(&["Thw"]));
    }

    #[test]
    fn frequency_weighting_prefers_common_misspellings() {
        let d = build_dictionary(
            [
                TypoEntry {
                    misspelled: "tge".into(),
                    correct: "the".into(),
                    language: Language::En,
                    frequency: 1,
                    sources: vec![],
                },
                TypoEntry {
                    misspelled: "thw".into(),
                    correct: "the".into(),
                    language: Language::En,
                    frequency: 99,
                    sources: vec![],
                },
            ],
            Language::En,
        )
        .unwrap();
        let mut c = cfg(NoiseMode::Dictionary);
        c.ratio_r = 1.0;
        let mut thw = 0;
        for seed in 0..200 {
            let mut rng = record_rng(seed, 0, 0);
            let (noisy, _) = inject_sentence(&strings(&["the"]), &d, &c, &mut rng);
            if noisy[0] == "thw" {
                thw += 1;
            }
        }
        assert!(thw > 180, "frequency weighting not in effect: {thw}/200");
    }

    #[test]
    fn keyboard_mode_preserves_alignment() {
        let layout = crate::keyboard_noise::load_layout("qwerty-en").unwrap();
        let mut c = cfg(NoiseMode::Keyboard);
        c.ratio_r = 1.0;
        c.max_words_m = 1;
        let tokens = strings(&["John", "visits", "Paris"]);
        let mut rng = record_rng(c.seed, 0, 0);
        let (noisy, replaced) = inject_sentence_keyboard(&tokens, &layout, &c, &mut rng);
        assert_eq!(noisy.len(), tokens.len());
        assert_eq!(replaced.len(), 1);
    }

    #[test]
    fn keyboard_mode_skips_numeric_tokens() {
        let layout = crate::keyboard_noise::load_layout("qwerty-en").unwrap();
        let mut c = cfg(NoiseMode::Keyboard);
        c.ratio_r = 1.0;
        let tokens = strings(&["1234", "56", "7"]);
        let mut rng = record_rng(c.seed, 0, 0);
        let (noisy, replaced) = inject_sentence_keyboard(&tokens, &layout, &c, &mut rng);
        assert_eq!(noisy, tokens);
        assert!(replaced.is_empty());
    }

    #[test]
    fn dataset_injection_is_deterministic_and_label_preserving() {
        let d = dict(&[("thw", "the"), ("anf", "and")]);
        let c = cfg(NoiseMode::Dictionary);
        let records = vec![
            DatasetRecord::Nli {
                premise: "the man and the dog".into(),
                hypothesis: "the dog is here".into(),
                label: "entailment".into(),
            },
            DatasetRecord::Ic {
                text: "play the song and dance".into(),
                label: "PlayMusic".into(),
            },
        ];
        let (out1, report1) =
            inject_dataset(&records, &c, NoiseBackend::Dictionary(&d)).unwrap();
        let (out2, report2) =
            inject_dataset(&records, &c, NoiseBackend::Dictionary(&d)).unwrap();
        assert_eq!(out1, out2);
        assert_eq!(report1, report2);
        for (orig, noisy) in records.iter().zip(&out1) {
            assert_eq!(orig.label(), noisy.label());
        }
        assert_eq!(report1.records_processed, 2);
        assert_eq!(
            report1.noise_ratio,
            report1.replacements_made as f64 / report1.tokens_total as f64
        );
    }

    #[test]
    fn empty_stream_yields_zero_report() {
        let d = dict(&[("thw", "the")]);
        let c = cfg(NoiseMode::Dictionary);
        let (out, report) = inject_dataset(&[], &c, NoiseBackend::Dictionary(&d)).unwrap();
        assert!(out.is_empty());
        assert_eq!(report.tokens_total, 0);
        assert_eq!(report.noise_ratio, 0.0);
    }

    #[test]
    fn misaligned_ner_record_is_rejected_but_run_continues() {
        let layout = crate::keyboard_noise::load_layout("qwerty-en").unwrap();
        let c = cfg(NoiseMode::Keyboard);
        let records = vec![
            DatasetRecord::Ner {
                tokens: strings(&["John", "runs"]),
                labels: strings(&["B-PER"]),
            },
            DatasetRecord::Ner {
                tokens: strings(&["Paris", "calls"]),
                labels: strings(&["B-LOC", "O"]),
            },
        ];
        let (out, report) = inject_dataset(&records, &c, NoiseBackend::Keyboard(&layout)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(report.records_rejected, 1);
        assert_eq!(report.rejected_indices, vec![0]);
        assert_eq!(out[0], records[0]);
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let d = dict(&[("thw", "the")]);
        let c = cfg(NoiseMode::Keyboard);
        let err = inject_dataset(&[], &c, NoiseBackend::Dictionary(&d)).unwrap_err();
        assert!(matches!(err, InjectionError::ModeMismatch { .. }));
    }

    proptest! {
        #[test]
        fn replacement_bound_holds(
            n_tokens in 0usize..60,
            ratio in 0.0f64..=1.0,
            m in 1usize..10,
        ) {
            let mut c = cfg(NoiseMode::Dictionary);
            c.ratio_r = ratio;
            c.max_words_m = m;
            let count = select_replacement_count(n_tokens, &c);
            prop_assert!(count <= m);
            prop_assert!(count <= n_tokens);
            prop_assert!(count <= round_half_up(ratio * n_tokens as f64) as usize);
        }

        #[test]
        fn dictionary_replacements_are_distance_one(
            words in proptest::collection::vec("[a-z]{3,6}", 1..10),
            seed: u64,
        ) {
            let d = dict(&[("thw", "the"), ("thr", "the"), ("cas", "cat")]);
            let mut c = cfg(NoiseMode::Dictionary);
            c.seed = seed;
            c.ratio_r = 1.0;
            c.max_words_m = 10;
            let tokens: Vec<String> = words;
            let mut rng = record_rng(c.seed, 0, 0);
            let (noisy, replaced) = inject_sentence(&tokens, &d, &c, &mut rng);
            prop_assert_eq!(noisy.len(), tokens.len());
            for &pos in &replaced {
                prop_assert_eq!(crate::textcore::levenshtein(&tokens[pos], &noisy[pos]), 1);
            }
            for i in 0..tokens.len() {
                if !replaced.contains(&i) {
                    prop_assert_eq!(&noisy[i], &tokens[i]);
                }
            }
        }
    }
}
