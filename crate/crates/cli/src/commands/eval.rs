//! `wikityper eval`: score clean and noisy prediction files against gold
//! data, and assemble the scored cells into gap reports.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand};
use serde_json::json;

use wikityper::dataset::{read_conll, read_jsonl, DatasetRecord, Task};
use wikityper::eval_gap::{
    assemble_report, read_label_predictions, read_tag_predictions, score, write_aggregates_csv,
    write_gap_csv, write_gap_markdown, GoldData, Predictions, ScoreCell,
};
use wikityper::round::round2;

use super::{parse_language, parse_task, require};
use crate::config::FileConfig;
use crate::invalid;
use crate::manifest::{RunManifest, MANIFEST_FILE};

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(subcommand)]
    cmd: Option<EvalCmd>,
    /// Task: ic, nli, or ner.
    #[arg(long)]
    task: Option<String>,
    /// Language code.
    #[arg(long)]
    lang: Option<String>,
    /// Model name recorded in the score cell.
    #[arg(long)]
    model: Option<String>,
    /// Gold dataset (JSONL for ic/nli, CoNLL for ner).
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Predictions on the clean test set.
    #[arg(long)]
    clean_pred: Option<PathBuf>,
    /// Predictions on the noisy test set.
    #[arg(long)]
    noisy_pred: Option<PathBuf>,
    /// Directory for the score cell and manifest.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum EvalCmd {
    /// Assemble gap tables from a directory of scored cells.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory of score-cell JSON files written by `eval`.
    #[arg(long)]
    runs: PathBuf,
    /// Output directory (defaults to the runs directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn read_gold(path: &Path, task: Task) -> anyhow::Result<GoldData> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("reading gold {}", path.display()))?;
    let reader = BufReader::new(file);
    let gold = match task {
        Task::Ner => GoldData::Tags(
            read_conll(reader)?
                .into_iter()
                .map(|r| match r {
                    DatasetRecord::Ner { labels, .. } => labels,
                    _ => unreachable!("read_conll only yields NER records"),
                })
                .collect(),
        ),
        _ => GoldData::Labels(
            read_jsonl(reader, task)?
                .iter()
                .map(|r| r.label().expect("ic/nli records carry labels").to_string())
                .collect(),
        ),
    };
    Ok(gold)
}

fn read_predictions(path: &Path, task: Task) -> anyhow::Result<Predictions> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("reading predictions {}", path.display()))?;
    let reader = BufReader::new(file);
    Ok(match task {
        Task::Ner => Predictions::Tags(read_tag_predictions(reader)?),
        _ => Predictions::Labels(read_label_predictions(reader)?),
    })
}

pub fn run(args: EvalArgs, file: &FileConfig) -> anyhow::Result<()> {
    if let Some(EvalCmd::Report(report)) = args.cmd {
        return run_report(report);
    }
    let section = &file.eval;
    let task = parse_task(&require(args.task.or_else(|| section.task.clone()), "--task")?)?;
    let lang = args.lang.or_else(|| section.lang.clone()).unwrap_or_else(|| "en".to_string());
    let language = parse_language(&lang)?;
    let model = require(args.model.or_else(|| section.model.clone()), "--model")?;
    let gold_path = require(args.gold.or_else(|| section.gold.clone()), "--gold")?;
    let clean_path = require(args.clean_pred.or_else(|| section.clean_pred.clone()), "--clean-pred")?;
    let noisy_path = require(args.noisy_pred.or_else(|| section.noisy_pred.clone()), "--noisy-pred")?;
    let out_dir = args
        .out_dir
        .or_else(|| section.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let gold = read_gold(&gold_path, task)?;
    let cell = ScoreCell {
        model: model.clone(),
        task,
        language,
        clean: score(&gold, &read_predictions(&clean_path, task)?)?,
        noisy: score(&gold, &read_predictions(&noisy_path, task)?)?,
    };
    println!(
        "{}\t{}\t{}\t{:.2}\t{:.2}\t{:.2}",
        cell.model,
        task.code(),
        language.code(),
        round2(cell.clean),
        round2(cell.noisy),
        round2(cell.gap()),
    );

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let cell_path = out_dir.join(format!("{model}.{}.{}.json", task.code(), language.code()));
    let json = serde_json::to_string_pretty(&cell).context("serializing score cell")?;
    std::fs::write(&cell_path, json + "\n")
        .with_context(|| format!("writing {}", cell_path.display()))?;

    let snapshot = json!({
        "task": task.code(),
        "lang": language.code(),
        "model": model,
        "gold": gold_path,
        "clean_pred": clean_path,
        "noisy_pred": noisy_path,
        "out_dir": out_dir,
    });
    RunManifest::new("eval", snapshot, 0, &[&gold_path, &clean_path, &noisy_path])?
        .write(&out_dir)?;
    Ok(())
}

fn run_report(args: ReportArgs) -> anyhow::Result<()> {
    let out_dir = args.out_dir.clone().unwrap_or_else(|| args.runs.clone());
    let mut cell_files: Vec<PathBuf> = std::fs::read_dir(&args.runs)
        .with_context(|| format!("reading {}", args.runs.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "json")
                && p.file_name().is_some_and(|n| n != MANIFEST_FILE)
        })
        .collect();
    cell_files.sort();
    if cell_files.is_empty() {
        return Err(invalid(format!("no score cells found in {}", args.runs.display())));
    }

    let mut cells = Vec::new();
    for path in &cell_files {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let cell: ScoreCell = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        cells.push(cell);
    }
    let report = assemble_report(&cells)?;
    log::info!(
        "assembled {} rows, {} row averages, {} model aggregates",
        report.rows.len(),
        report.row_averages.len(),
        report.model_aggregates.len(),
    );

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut csv = std::fs::File::create(out_dir.join("gap_report.csv"))?;
    write_gap_csv(&mut csv, &report)?;
    let mut md = std::fs::File::create(out_dir.join("gap_report.md"))?;
    write_gap_markdown(&mut md, &report)?;
    let mut agg = std::fs::File::create(out_dir.join("aggregates.csv"))?;
    write_aggregates_csv(&mut agg, &report)?;

    let inputs: Vec<&Path> = cell_files.iter().map(|p| p.as_path()).collect();
    let snapshot = json!({ "runs": args.runs, "out_dir": out_dir });
    RunManifest::new("eval report", snapshot, 0, &inputs)?.write(&out_dir)?;
    Ok(())
}
