//! `wikityper stats`: corpus statistics for a clean dataset plus injection
//! report, and PoS histograms for externally tagged noise.

use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};
use serde_json::json;

use wikityper::corpus_stats::{compute_stats, pos_histogram, write_pos_csv, write_stats_csv, write_stats_json};
use wikityper::dataset::{read_conll, read_jsonl, Task};
use wikityper::noise_injection::InjectionReport;

use super::{parse_language, parse_task, require};
use crate::config::FileConfig;
use crate::manifest::{out_dir_of, RunManifest};

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(subcommand)]
    cmd: Option<StatsCmd>,
    /// Task of the clean dataset: ic, nli, or ner.
    #[arg(long)]
    task: Option<String>,
    /// Language code.
    #[arg(long)]
    lang: Option<String>,
    /// Dataset name recorded in the output row.
    #[arg(long)]
    dataset: Option<String>,
    /// Clean dataset (JSONL for ic/nli, CoNLL for ner).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Injection report JSON produced by `inject --report`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional machine-readable JSON output.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum StatsCmd {
    /// Histogram of PoS tags from a `word<TAB>tag` file.
    Pos(PosArgs),
}

#[derive(Args, Debug)]
struct PosArgs {
    /// Tagged input, one `word<TAB>tag` per line.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: StatsArgs, file: &FileConfig) -> anyhow::Result<()> {
    if let Some(StatsCmd::Pos(pos)) = args.cmd {
        return run_pos(pos);
    }
    let section = &file.stats;
    let task = parse_task(&require(args.task.or_else(|| section.task.clone()), "--task")?)?;
    let lang = args.lang.or_else(|| section.lang.clone()).unwrap_or_else(|| "en".to_string());
    let language = parse_language(&lang)?;
    let input = require(args.input.or_else(|| section.input.clone()), "--in")?;
    let report_path = require(args.report.or_else(|| section.report.clone()), "--report")?;
    let out = require(args.out.or_else(|| section.out.clone()), "--out")?;
    let dataset = args
        .dataset
        .or_else(|| section.dataset.clone())
        .or_else(|| input.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "dataset".to_string());

    let data = std::fs::File::open(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    let records = match task {
        Task::Ner => read_conll(BufReader::new(data))?,
        _ => read_jsonl(BufReader::new(data), task)?,
    };
    let report_text = std::fs::read_to_string(&report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report: InjectionReport = serde_json::from_str(&report_text)
        .with_context(|| format!("parsing {}", report_path.display()))?;

    let stats = compute_stats(&records, &dataset, language, &report);
    log::info!(
        "{} {}: {} tokens, {} noise, ratio {:.2}",
        dataset,
        language.code(),
        stats.n_tokens,
        stats.n_noise,
        stats.noise_ratio,
    );

    let rows = [stats];
    let out_dir = out_dir_of(&out).to_path_buf();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut csv = std::fs::File::create(&out)
        .with_context(|| format!("writing {}", out.display()))?;
    write_stats_csv(&mut csv, &rows)?;
    let json_path = args.json.or_else(|| section.json.clone());
    if let Some(json_path) = &json_path {
        let mut jf = std::fs::File::create(json_path)
            .with_context(|| format!("writing {}", json_path.display()))?;
        write_stats_json(&mut jf, &rows)?;
    }

    let snapshot = json!({
        "task": task.code(),
        "lang": language.code(),
        "dataset": dataset,
        "in": input,
        "report": report_path,
        "out": out,
        "json": json_path,
    });
    RunManifest::new("stats", snapshot, 0, &[&input, &report_path])?.write(&out_dir)?;
    Ok(())
}

fn run_pos(args: PosArgs) -> anyhow::Result<()> {
    let data = std::fs::File::open(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let hist = pos_histogram(BufReader::new(data))?;
    log::info!(
        "{} lines, {} malformed, {} distinct tags",
        hist.total_lines,
        hist.malformed_lines,
        hist.counts.len(),
    );
    let out_dir = out_dir_of(&args.out).to_path_buf();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut out = std::fs::File::create(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_pos_csv(&mut out, &hist)?;
    let snapshot = json!({ "in": args.input, "out": args.out });
    RunManifest::new("stats pos", snapshot, 0, &[&args.input])?.write(&out_dir)?;
    Ok(())
}
