pub mod eval;
pub mod inject;
pub mod mine;
pub mod stats;

use wikityper::dataset::Task;
use wikityper::textcore::Language;

use crate::invalid;

pub fn parse_language(code: &str) -> anyhow::Result<Language> {
    code.parse::<Language>().map_err(|e| invalid(e.to_string()))
}

pub fn parse_task(code: &str) -> anyhow::Result<Task> {
    code.parse::<Task>().map_err(|e| invalid(e.to_string()))
}

/// A parameter that has no default and must come from a flag or the config
/// file.
pub fn require<T>(value: Option<T>, flag: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| invalid(format!("missing required parameter {flag}")))
}
