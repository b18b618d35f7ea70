//! Score model prediction files against gold labels on clean and noisy test
//! sets and emit clean-minus-noisy gap tables with row, task, and model
//! aggregates.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::round::round2;
use crate::textcore::Language;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("gold/prediction alignment error at index {index}: {message}")]
    Alignment { index: usize, message: String },
    #[error("empty gold set")]
    EmptyGold,
    #[error("invalid gold BIO in sentence {sentence}: {message}")]
    InvalidGold { sentence: usize, message: String },
    #[error("invalid prediction tag {tag:?} in sentence {sentence}")]
    InvalidPredTag { sentence: usize, tag: String },
    #[error("duplicate run for ({model}, {task}, {language}, {variant})")]
    DuplicateRun {
        model: String,
        task: Task,
        language: Language,
        variant: Variant,
    },
    #[error("duplicate score cell for ({model}, {task}, {language})")]
    DuplicateCell {
        model: String,
        task: Task,
        language: Language,
    },
    #[error("no gold data for ({task}, {language})")]
    MissingGold { task: Task, language: Language },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Clean,
    Noisy,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Clean => "clean",
            Variant::Noisy => "noisy",
        })
    }
}

/// Predictions for one (model, task, language, variant) evaluation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRun {
    pub model: String,
    pub task: Task,
    pub language: Language,
    pub variant: Variant,
    pub predictions: Predictions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predictions {
    /// One class label per record (ic / nli).
    Labels(Vec<String>),
    /// One BIO tag sequence per sentence (ner).
    Tags(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldData {
    Labels(Vec<String>),
    Tags(Vec<Vec<String>>),
}

/// Percentage of exactly matching labels.
pub fn accuracy(gold: &[String], pred: &[String]) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if gold.len() != pred.len() {
        return Err(EvalError::Alignment {
            index: gold.len().min(pred.len()),
            message: format!(
                "gold has {} labels, predictions have {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    let matches = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(100.0 * matches as f64 / gold.len() as f64)
}

/// An entity chunk: (type, start, end) with end inclusive.
pub type Chunk = (String, usize, usize);

/// Extract entity chunks from a BIO sequence. With `repair` a dangling I-X
/// opens a new chunk as if it were B-X; without it any dangling I-X or
/// malformed tag is an error. Returns the chunks and the repair count.
pub fn bio_chunks(tags: &[String], repair: bool) -> Result<(Vec<Chunk>, u64), String> {
    let mut chunks = Vec::new();
    let mut repairs = 0u64;
    let mut open: Option<(String, usize)> = None;
    for (i, tag) in tags.iter().enumerate() {
        if tag == "O" {
            if let Some((ty, start)) = open.take() {
                chunks.push((ty, start, i - 1));
            }
            continue;
        }
        let (prefix, entity) = tag
            .split_once('-')
            .ok_or_else(|| format!("tag {tag:?} at position {i} is not O, B-X, or I-X"))?;
        match prefix {
            "B" => {
                if let Some((ty, start)) = open.take() {
                    chunks.push((ty, start, i - 1));
                }
                open = Some((entity.to_string(), i));
            }
            "I" => match &open {
                Some((ty, _)) if ty == entity => {}
                _ => {
                    if !repair {
                        return Err(format!("dangling {tag} at position {i}"));
                    }
                    repairs += 1;
                    if let Some((ty, start)) = open.take() {
                        chunks.push((ty, start, i - 1));
                    }
                    open = Some((entity.to_string(), i));
                }
            },
            other => return Err(format!("unknown prefix {other:?} at position {i}")),
        }
    }
    if let Some((ty, start)) = open {
        chunks.push((ty, start, tags.len() - 1));
    }
    Ok((chunks, repairs))
}

/// Entity-level micro scores in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub repaired_predictions: u64,
}

/// Entity-level micro F1 with exact boundary and type matching. Invalid BIO
/// in predictions is repaired (dangling I-X read as B-X); invalid gold is an
/// error.
pub fn entity_f1(gold: &[Vec<String>], pred: &[Vec<String>]) -> Result<F1Score, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if gold.len() != pred.len() {
        return Err(EvalError::Alignment {
            index: gold.len().min(pred.len()),
            message: format!(
                "gold has {} sentences, predictions have {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    let mut gold_total = 0usize;
    let mut pred_total = 0usize;
    let mut matched = 0usize;
    let mut repairs = 0u64;
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::Alignment {
                index: i,
                message: format!(
                    "sentence {i}: gold has {} tokens, prediction has {}",
                    g.len(),
                    p.len()
                ),
            });
        }
        let (gold_chunks, _) = bio_chunks(g, false).map_err(|message| EvalError::InvalidGold {
            sentence: i,
            message,
        })?;
        let (pred_chunks, r) = bio_chunks(p, true).map_err(|message| EvalError::InvalidPredTag {
            sentence: i,
            tag: message,
        })?;
        repairs += r;
        gold_total += gold_chunks.len();
        pred_total += pred_chunks.len();
        let gold_set: BTreeSet<&Chunk> = gold_chunks.iter().collect();
        matched += pred_chunks.iter().filter(|c| gold_set.contains(c)).count();
    }
    let precision = if pred_total == 0 {
        0.0
    } else {
        matched as f64 / pred_total as f64
    };
    let recall = if gold_total == 0 {
        0.0
    } else {
        matched as f64 / gold_total as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(F1Score {
        precision: 100.0 * precision,
        recall: 100.0 * recall,
        f1: 100.0 * f1,
        repaired_predictions: repairs,
    })
}

/// Token-level micro F1 over non-O tags, for sensitivity analysis.
pub fn token_f1(gold: &[Vec<String>], pred: &[Vec<String>]) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let mut tp = 0usize;
    let mut gold_pos = 0usize;
    let mut pred_pos = 0usize;
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::Alignment {
                index: i,
                message: "token count mismatch".to_string(),
            });
        }
        for (gt, pt) in g.iter().zip(p) {
            if gt != "O" {
                gold_pos += 1;
            }
            if pt != "O" {
                pred_pos += 1;
            }
            if gt == pt && gt != "O" {
                tp += 1;
            }
        }
    }
    let precision = if pred_pos == 0 {
        0.0
    } else {
        tp as f64 / pred_pos as f64
    };
    let recall = if gold_pos == 0 {
        0.0
    } else {
        tp as f64 / gold_pos as f64
    };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(100.0 * 2.0 * precision * recall / (precision + recall))
}

/// Clean and noisy scores for one (model, task, language) triple, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub model: String,
    pub task: Task,
    pub language: Language,
    pub clean: f64,
    pub noisy: f64,
}

impl ScoreCell {
    pub fn gap(&self) -> f64 {
        self.clean - self.noisy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub model: String,
    pub task: Task,
    pub language: Language,
    pub clean: f64,
    pub noisy: f64,
    pub gap: f64,
}

/// Per-(model, task) means over the languages the model actually covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowAverage {
    pub model: String,
    pub task: Task,
    pub clean_avg: f64,
    pub noisy_avg: f64,
    pub gap_avg: f64,
    pub n_languages: usize,
}

/// Overall per-model gap under three aggregation routes. Published overall
/// numbers are ambiguous about the formula, so all three are reported:
/// mean of per-task averages, mean over all (task, language) cells, and mean
/// over per-language averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAggregate {
    pub model: String,
    pub mean_of_task_averages: f64,
    pub mean_over_cells: f64,
    pub mean_over_language_averages: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    pub row_averages: Vec<RowAverage>,
    pub model_aggregates: Vec<ModelAggregate>,
}

const LANGUAGE_ORDER: [Language; 6] = [
    Language::En,
    Language::De,
    Language::Es,
    Language::Fr,
    Language::Hi,
    Language::Tr,
];
const TASK_ORDER: [Task; 3] = [Task::Ic, Task::Ner, Task::Nli];

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Assemble the gap report from per-cell scores. Missing (model, task,
/// language) cells are simply absent and excluded from averages.
pub fn assemble_report(cells: &[ScoreCell]) -> Result<GapReport, EvalError> {
    let mut seen = BTreeSet::new();
    for cell in cells {
        if !seen.insert((cell.model.clone(), cell.task, cell.language)) {
            return Err(EvalError::DuplicateCell {
                model: cell.model.clone(),
                task: cell.task,
                language: cell.language,
            });
        }
    }

    // Models keep first-appearance order.
    let mut models: Vec<String> = Vec::new();
    for cell in cells {
        if !models.contains(&cell.model) {
            models.push(cell.model.clone());
        }
    }

    let mut rows = Vec::new();
    let mut row_averages = Vec::new();
    let mut model_aggregates = Vec::new();
    for model in &models {
        let mut task_gap_avgs = Vec::new();
        let mut all_gaps = Vec::new();
        for task in TASK_ORDER {
            let mut clean = Vec::new();
            let mut noisy = Vec::new();
            let mut gaps = Vec::new();
            for language in LANGUAGE_ORDER {
                let Some(cell) = cells.iter().find(|c| {
                    &c.model == model && c.task == task && c.language == language
                }) else {
                    continue;
                };
                rows.push(GapRow {
                    model: model.clone(),
                    task,
                    language,
                    clean: cell.clean,
                    noisy: cell.noisy,
                    gap: cell.gap(),
                });
                clean.push(cell.clean);
                noisy.push(cell.noisy);
                // Averages are taken over the gaps as printed (2 decimals),
                // matching how the published row averages were produced.
                gaps.push(round2(cell.gap()));
            }
            if gaps.is_empty() {
                continue;
            }
            row_averages.push(RowAverage {
                model: model.clone(),
                task,
                clean_avg: mean(&clean),
                noisy_avg: mean(&noisy),
                gap_avg: mean(&gaps),
                n_languages: gaps.len(),
            });
            task_gap_avgs.push(mean(&gaps));
            all_gaps.extend(gaps);
        }
        if task_gap_avgs.is_empty() {
            continue;
        }
        let mut language_avgs = Vec::new();
        for language in LANGUAGE_ORDER {
            let gaps: Vec<f64> = cells
                .iter()
                .filter(|c| &c.model == model && c.language == language)
                .map(|c| round2(c.gap()))
                .collect();
            if !gaps.is_empty() {
                language_avgs.push(mean(&gaps));
            }
        }
        model_aggregates.push(ModelAggregate {
            model: model.clone(),
            mean_of_task_averages: mean(&task_gap_avgs),
            mean_over_cells: mean(&all_gaps),
            mean_over_language_averages: mean(&language_avgs),
        });
    }

    Ok(GapReport {
        rows,
        row_averages,
        model_aggregates,
    })
}

/// Pair clean/noisy runs, score them against gold, and assemble the report.
/// Triples lacking one variant are skipped; the skip list is returned.
pub fn build_gap_report(
    runs: &[PredictionRun],
    golds: &BTreeMap<(Task, Language), GoldData>,
) -> Result<(GapReport, Vec<String>), EvalError> {
    let mut by_key: BTreeMap<(String, Task, Language), [Option<&PredictionRun>; 2]> =
        BTreeMap::new();
    for run in runs {
        let slot = by_key
            .entry((run.model.clone(), run.task, run.language))
            .or_default();
        let idx = match run.variant {
            Variant::Clean => 0,
            Variant::Noisy => 1,
        };
        if slot[idx].is_some() {
            return Err(EvalError::DuplicateRun {
                model: run.model.clone(),
                task: run.task,
                language: run.language,
                variant: run.variant,
            });
        }
        slot[idx] = Some(run);
    }

    let mut cells = Vec::new();
    let mut warnings = Vec::new();
    // Preserve first-appearance order of models from the input runs.
    let mut ordered_keys: Vec<(String, Task, Language)> = Vec::new();
    for run in runs {
        let key = (run.model.clone(), run.task, run.language);
        if !ordered_keys.contains(&key) {
            ordered_keys.push(key);
        }
    }
    for key in ordered_keys {
        let slot = &by_key[&key];
        let (model, task, language) = key;
        match slot {
            [Some(clean), Some(noisy)] => {
                let gold = golds
                    .get(&(task, language))
                    .ok_or(EvalError::MissingGold { task, language })?;
                cells.push(ScoreCell {
                    model,
                    task,
                    language,
                    clean: score(gold, &clean.predictions)?,
                    noisy: score(gold, &noisy.predictions)?,
                });
            }
            _ => {
                warnings.push(format!(
                    "skipping ({model}, {task}, {language}): missing {} variant",
                    if slot[0].is_none() { "clean" } else { "noisy" }
                ));
            }
        }
    }
    let report = assemble_report(&cells)?;
    Ok((report, warnings))
}

pub fn score(gold: &GoldData, pred: &Predictions) -> Result<f64, EvalError> {
    match (gold, pred) {
        (GoldData::Labels(g), Predictions::Labels(p)) => accuracy(g, p),
        (GoldData::Tags(g), Predictions::Tags(p)) => Ok(entity_f1(g, p)?.f1),
        _ => Err(EvalError::Alignment {
            index: 0,
            message: "gold and prediction kinds do not match".to_string(),
        }),
    }
}

/// Read `{"id": int, "label": str}` JSONL predictions, ordered by id.
pub fn read_label_predictions<R: BufRead>(r: R) -> Result<Vec<String>, EvalError> {
    #[derive(Deserialize)]
    struct Line {
        id: u64,
        label: String,
    }
    let mut entries = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push((parsed.id, parsed.label));
    }
    entries.sort_by_key(|(id, _)| *id);
    Ok(entries.into_iter().map(|(_, label)| label).collect())
}

/// Read CoNLL two-column `token<TAB>predicted_tag` predictions.
pub fn read_tag_predictions<R: BufRead>(r: R) -> Result<Vec<Vec<String>>, EvalError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (_, tag) = line.split_once('\t').ok_or_else(|| EvalError::Parse {
            line: i + 1,
            message: format!("expected token<TAB>tag, got {line:?}"),
        })?;
        current.push(tag.to_string());
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

pub fn write_gap_csv<W: Write>(mut w: W, report: &GapReport) -> Result<(), EvalError> {
    writeln!(w, "model,task,language,clean,noisy,gap")?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{:.2},{:.2},{:.2}",
            row.model,
            row.task,
            row.language,
            round2(row.clean),
            round2(row.noisy),
            round2(row.gap)
        )?;
    }
    writeln!(w)?;
    writeln!(w, "model,task,clean_avg,noisy_avg,gap_avg,n_languages")?;
    for avg in &report.row_averages {
        writeln!(
            w,
            "{},{},{:.2},{:.2},{:.2},{}",
            avg.model,
            avg.task,
            round2(avg.clean_avg),
            round2(avg.noisy_avg),
            round2(avg.gap_avg),
            avg.n_languages
        )?;
    }
    Ok(())
}

pub fn write_gap_markdown<W: Write>(mut w: W, report: &GapReport) -> Result<(), EvalError> {
    for task in TASK_ORDER {
        let averages: Vec<&RowAverage> = report
            .row_averages
            .iter()
            .filter(|a| a.task == task)
            .collect();
        if averages.is_empty() {
            continue;
        }
        let metric = match task {
            Task::Ner => "F1",
            _ => "Accuracy (%)",
        };
        writeln!(w, "## {} - {}", task.code().to_uppercase(), metric)?;
        writeln!(w)?;
        write!(w, "| Model | |")?;
        for language in LANGUAGE_ORDER {
            write!(w, " {language} |")?;
        }
        writeln!(w, " Average |")?;
        write!(w, "|---|---|")?;
        for _ in LANGUAGE_ORDER {
            write!(w, "---|")?;
        }
        writeln!(w, "---|")?;
        for avg in averages {
            for (kind, pick, total) in [
                ("Clean", 0usize, avg.clean_avg),
                ("Noisy", 1, avg.noisy_avg),
                ("C-N", 2, avg.gap_avg),
            ] {
                write!(w, "| {} | {kind} |", avg.model)?;
                for language in LANGUAGE_ORDER {
                    let cell = report.rows.iter().find(|r| {
                        r.model == avg.model && r.task == task && r.language == language
                    });
                    match cell {
                        Some(row) => {
                            let value = [row.clean, row.noisy, row.gap][pick];
                            write!(w, " {:.2} |", round2(value))?;
                        }
                        None => write!(w, " - |")?,
                    }
                }
                writeln!(w, " {:.2} |", round2(total))?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(mut w: W, report: &GapReport) -> Result<(), EvalError> {
    writeln!(
        w,
        "model,gap_ic,gap_ner,gap_nli,mean_of_task_averages,mean_over_cells,mean_over_language_averages"
    )?;
    for agg in &report.model_aggregates {
        let task_gap = |task: Task| {
            report
                .row_averages
                .iter()
                .find(|a| a.model == agg.model && a.task == task)
                .map(|a| format!("{:.2}", round2(a.gap_avg)))
                .unwrap_or_else(|| "-".to_string())
        };
        writeln!(
            w,
            "{},{},{},{},{:.2},{:.2},{:.2}",
            agg.model,
            task_gap(Task::Ic),
            task_gap(Task::Ner),
            task_gap(Task::Nli),
            round2(agg.mean_of_task_averages),
            round2(agg.mean_over_cells),
            round2(agg.mean_over_language_averages)
        )?;
    }
    Ok(())
}
