//! `wikityper inject`: rewrite a dataset with dictionary or keyboard noise.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde_json::json;

use wikityper::dataset::{read_conll, read_jsonl, write_conll, write_jsonl, DatasetRecord, Task};
use wikityper::keyboard_noise::load_layout;
use wikityper::noise_injection::{inject_dataset, NoiseBackend, NoiseConfig, NoiseMode};
use wikityper::textcore::Language;
use wikityper::typo_mining::TypoDictionary;

use super::{parse_language, parse_task, require};
use crate::config::FileConfig;
use crate::invalid;
use crate::manifest::{out_dir_of, RunManifest};

#[derive(Args, Debug)]
pub struct InjectArgs {
    /// Task: ic, nli, or ner.
    #[arg(long)]
    task: Option<String>,
    /// Language code of the dataset and dictionary.
    #[arg(long)]
    lang: Option<String>,
    /// Noise mode: dictionary or keyboard (default: keyboard for ner,
    /// dictionary otherwise).
    #[arg(long)]
    mode: Option<String>,
    /// Typo dictionary (TSV) for dictionary mode.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Keyboard layout name or JSON path for keyboard mode.
    #[arg(long)]
    layout: Option<String>,
    /// Fraction r of tokens to replace per record.
    #[arg(long)]
    ratio: Option<f64>,
    /// Cap m on replacements per record.
    #[arg(long)]
    max_words: Option<usize>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Clean input dataset (JSONL for ic/nli, CoNLL for ner).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Noisy output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Injection report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

fn default_layout(language: Language) -> Option<&'static str> {
    match language {
        Language::En => Some("qwerty-en"),
        Language::De => Some("qwertz-de"),
        Language::Es => Some("qwerty-es"),
        Language::Fr => Some("azerty-fr"),
        Language::Tr => Some("qwerty-tr"),
        _ => None,
    }
}

fn read_dataset(path: &Path, task: Task) -> anyhow::Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let reader = BufReader::new(file);
    let records = match task {
        Task::Ner => read_conll(reader)?,
        _ => read_jsonl(reader, task)?,
    };
    if records.is_empty() {
        return Err(invalid(format!("{} contains no records", path.display())));
    }
    Ok(records)
}

fn write_dataset(path: &Path, task: Task, records: &[DatasetRecord]) -> anyhow::Result<()> {
    let mut out = std::fs::File::create(path)
        .with_context(|| format!("writing {}", path.display()))?;
    match task {
        Task::Ner => write_conll(&mut out, records)?,
        _ => write_jsonl(&mut out, records)?,
    }
    Ok(())
}

pub fn run(args: InjectArgs, file: &FileConfig) -> anyhow::Result<()> {
    let section = &file.inject;
    let task = parse_task(&require(args.task.or_else(|| section.task.clone()), "--task")?)?;
    let lang = args.lang.or_else(|| section.lang.clone()).unwrap_or_else(|| "en".to_string());
    let language = parse_language(&lang)?;
    let mode_name = args.mode.or_else(|| section.mode.clone()).unwrap_or_else(|| {
        match task {
            Task::Ner => "keyboard",
            _ => "dictionary",
        }
        .to_string()
    });
    let mode = match mode_name.as_str() {
        "dictionary" => NoiseMode::Dictionary,
        "keyboard" => NoiseMode::Keyboard,
        other => {
            return Err(invalid(format!(
                "unknown mode {other:?} (expected dictionary or keyboard)"
            )))
        }
    };
    let input = require(args.input.or_else(|| section.input.clone()), "--in")?;
    let out = require(args.out.or_else(|| section.out.clone()), "--out")?;
    if input == out {
        return Err(invalid("--out must not overwrite the input file"));
    }
    let seed = args.seed.or(section.seed).unwrap_or(0);

    let mut cfg = NoiseConfig::new(mode, language, seed);
    if let Some(ratio) = args.ratio.or(section.ratio) {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(invalid("ratio must be in [0,1]"));
        }
        cfg.ratio_r = ratio;
    }
    if let Some(m) = args.max_words.or(section.max_words) {
        cfg.max_words_m = m;
    }
    cfg.validate().map_err(|e| invalid(e.to_string()))?;

    let dict_path = args.dict.or_else(|| section.dict.clone());
    let layout_name = args.layout.or_else(|| section.layout.clone());

    let records = read_dataset(&input, task)?;

    let mut inputs: Vec<&Path> = vec![&input];
    let dictionary;
    let layout;
    let backend = match mode {
        NoiseMode::Dictionary => {
            let path = require(dict_path.as_ref(), "--dict")?;
            let file = std::fs::File::open(path)
                .with_context(|| format!("reading dictionary {}", path.display()))?;
            dictionary = TypoDictionary::read_tsv(BufReader::new(file), language)?;
            inputs.push(path);
            NoiseBackend::Dictionary(&dictionary)
        }
        NoiseMode::Keyboard => {
            let name = match &layout_name {
                Some(name) => name.clone(),
                None => default_layout(language)
                    .ok_or_else(|| {
                        invalid(format!("no built-in layout for {lang}; pass --layout"))
                    })?
                    .to_string(),
            };
            layout = load_layout(&name).map_err(|e| invalid(e.to_string()))?;
            NoiseBackend::Keyboard(&layout)
        }
    };

    let (noisy, report) = inject_dataset(&records, &cfg, backend)?;
    log::info!(
        "replaced {} of {} tokens across {} records ({} rejected), realized ratio {:.4}",
        report.replacements_made,
        report.tokens_total,
        report.records_processed,
        report.records_rejected,
        report.noise_ratio,
    );

    let out_dir = out_dir_of(&out).to_path_buf();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    write_dataset(&out, task, &noisy)?;
    let report_path = args.report.or_else(|| section.report.clone());
    if let Some(report_path) = &report_path {
        let json = serde_json::to_string_pretty(&report).context("serializing report")?;
        std::fs::write(report_path, json + "\n")
            .with_context(|| format!("writing {}", report_path.display()))?;
    }

    let snapshot = json!({
        "task": task.code(),
        "lang": language.code(),
        "mode": mode_name,
        "dict": dict_path,
        "layout": layout_name,
        "ratio": cfg.ratio_r,
        "max_words": cfg.max_words_m,
        "seed": seed,
        "in": input,
        "out": out,
        "report": report_path,
    });
    RunManifest::new("inject", snapshot, seed, &inputs)?.write(&out_dir)?;
    Ok(())
}
