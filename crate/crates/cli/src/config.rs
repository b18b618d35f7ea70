//! Optional TOML configuration. Precedence is defaults < config file <
//! command-line flags; each subcommand resolves its own section.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use crate::invalid;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub mine: MineSection,
    pub inject: InjectSection,
    pub stats: StatsSection,
    pub eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineSection {
    pub lang: Option<String>,
    pub pages: Option<usize>,
    pub revs_per_page: Option<usize>,
    pub source: Option<String>,
    pub dump_path: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub rate_limit: Option<f64>,
    pub min_frequency: Option<u32>,
    pub drop_case_only: Option<bool>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InjectSection {
    pub task: Option<String>,
    pub lang: Option<String>,
    pub mode: Option<String>,
    pub dict: Option<PathBuf>,
    pub layout: Option<String>,
    pub ratio: Option<f64>,
    pub max_words: Option<usize>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub task: Option<String>,
    pub lang: Option<String>,
    pub dataset: Option<String>,
    pub input: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub model: Option<String>,
    pub task: Option<String>,
    pub lang: Option<String>,
    pub gold: Option<PathBuf>,
    pub clean_pred: Option<PathBuf>,
    pub noisy_pred: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    toml::from_str(&text).map_err(|e| invalid(format!("config file {}: {e}", path.display())))
}
