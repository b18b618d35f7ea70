//! Dataset records for the three evaluated tasks and their on-disk formats:
//! JSONL for intent classification and NLI, CoNLL-style columns for NER.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ic,
    Nli,
    Ner,
}

impl Task {
    pub fn code(&self) -> &'static str {
        match self {
            Task::Ic => "ic",
            Task::Nli => "nli",
            Task::Ner => "ner",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Task {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ic" => Ok(Task::Ic),
            "nli" => Ok(Task::Nli),
            "ner" => Ok(Task::Ner),
            other => Err(DatasetError::UnknownTask(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("unknown task {0:?} (expected ic, nli, or ner)")]
    UnknownTask(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sentence starting at line {line}: {message}")]
    InvalidBio { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetRecord {
    Nli {
        premise: String,
        hypothesis: String,
        label: String,
    },
    Ic {
        text: String,
        label: String,
    },
    #[serde(skip)]
    Ner {
        tokens: Vec<String>,
        labels: Vec<String>,
    },
}

impl DatasetRecord {
    pub fn task(&self) -> Task {
        match self {
            DatasetRecord::Ic { .. } => Task::Ic,
            DatasetRecord::Nli { .. } => Task::Nli,
            DatasetRecord::Ner { .. } => Task::Ner,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            DatasetRecord::Ic { label, .. } | DatasetRecord::Nli { label, .. } => Some(label),
            DatasetRecord::Ner { .. } => None,
        }
    }
}

/// Check that a tag sequence is a valid BIO sequence over {LOC, PER, ORG}:
/// an I-X may only follow B-X or I-X.
pub fn validate_bio(labels: &[String]) -> Result<(), String> {
    let mut prev_type: Option<&str> = None;
    for (i, tag) in labels.iter().enumerate() {
        if tag == "O" {
            prev_type = None;
            continue;
        }
        let (prefix, entity) = tag
            .split_once('-')
            .ok_or_else(|| format!("tag {tag:?} at position {i} is not O, B-X, or I-X"))?;
        if !matches!(entity, "LOC" | "PER" | "ORG") {
            return Err(format!("unknown entity type {entity:?} at position {i}"));
        }
        match prefix {
            "B" => prev_type = Some(entity),
            "I" => {
                if prev_type != Some(entity) {
                    return Err(format!(
                        "dangling {tag} at position {i} (no preceding B-{entity}/I-{entity})"
                    ));
                }
            }
            other => return Err(format!("unknown prefix {other:?} at position {i}")),
        }
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R, task: Task) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut records = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match task {
            Task::Ic => {
                #[derive(Deserialize)]
                struct Ic {
                    text: String,
                    label: String,
                }
                let ic: Ic = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                DatasetRecord::Ic {
                    text: ic.text,
                    label: ic.label,
                }
            }
            Task::Nli => {
                #[derive(Deserialize)]
                struct Nli {
                    premise: String,
                    hypothesis: String,
                    label: String,
                }
                let nli: Nli = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                DatasetRecord::Nli {
                    premise: nli.premise,
                    hypothesis: nli.hypothesis,
                    label: nli.label,
                }
            }
            Task::Ner => {
                return Err(DatasetError::Parse {
                    line: i + 1,
                    message: "NER datasets use the CoNLL format, not JSONL".to_string(),
                })
            }
        };
        records.push(record);
    }
    Ok(records)
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[DatasetRecord]) -> Result<(), DatasetError> {
    for record in records {
        match record {
            DatasetRecord::Ic { text, label } => {
                #[derive(Serialize)]
                struct Ic<'a> {
                    text: &'a str,
                    label: &'a str,
                }
                let line = serde_json::to_string(&Ic { text, label }).expect("serializes");
                writeln!(w, "{line}")?;
            }
            DatasetRecord::Nli {
                premise,
                hypothesis,
                label,
            } => {
                #[derive(Serialize)]
                struct Nli<'a> {
                    premise: &'a str,
                    hypothesis: &'a str,
                    label: &'a str,
                }
                let line = serde_json::to_string(&Nli {
                    premise,
                    hypothesis,
                    label,
                })
                .expect("serializes");
                writeln!(w, "{line}")?;
            }
            DatasetRecord::Ner { .. } => {
                return Err(DatasetError::Parse {
                    line: 0,
                    message: "NER records serialize to CoNLL, not JSONL".to_string(),
                })
            }
        }
    }
    Ok(())
}

/// Read `token<TAB>tag` columns with blank lines between sentences. Gold BIO
/// validity is not enforced here; callers decide whether to reject.
pub fn read_conll<R: BufRead>(r: R) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut records = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            if !tokens.is_empty() {
                records.push(DatasetRecord::Ner {
                    tokens: std::mem::take(&mut tokens),
                    labels: std::mem::take(&mut labels),
                });
            }
            continue;
        }
        let (token, tag) = line.split_once('\t').ok_or_else(|| DatasetError::Parse {
            line: i + 1,
            message: format!("expected token<TAB>tag, got {line:?}"),
        })?;
        tokens.push(token.to_string());
        labels.push(tag.to_string());
    }
    if !tokens.is_empty() {
        records.push(DatasetRecord::Ner { tokens, labels });
    }
    Ok(records)
}

pub fn write_conll<W: Write>(mut w: W, records: &[DatasetRecord]) -> Result<(), DatasetError> {
    for record in records {
        match record {
            DatasetRecord::Ner { tokens, labels } => {
                for (token, tag) in tokens.iter().zip(labels) {
                    writeln!(w, "{token}\t{tag}")?;
                }
                writeln!(w)?;
            }
            _ => {
                return Err(DatasetError::Parse {
                    line: 0,
                    message: "only NER records serialize to CoNLL".to_string(),
                })
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_jsonl_round_trip() {
        let input = "{\"text\":\"find me a movie\",\"label\":\"SearchScreeningEvent\"}\n";
        let records = read_jsonl(input.as_bytes(), Task::Ic).unwrap();
        assert_eq!(records.len(), 1);
        let mut out = Vec::new();
        write_jsonl(&mut out, &records).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
    }

    #[test]
    fn nli_jsonl_round_trip() {
        let input = "{\"premise\":\"a man walks\",\"hypothesis\":\"someone moves\",\"label\":\"entailment\"}\n";
        let records = read_jsonl(input.as_bytes(), Task::Nli).unwrap();
        assert!(matches!(records[0], DatasetRecord::Nli { .. }));
        let mut out = Vec::new();
        write_jsonl(&mut out, &records).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
    }

    #[test]
    fn conll_round_trip() {
        let input = "John\tB-PER\nSmith\tI-PER\nruns\tO\n\nParis\tB-LOC\n\n";
        let records = read_conll(input.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        let mut out = Vec::new();
        write_conll(&mut out, &records).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
    }

    #[test]
    fn conll_rejects_missing_tab() {
        let err = read_conll("John B-PER\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { line: 1, .. }));
    }

    #[test]
    fn bio_validation() {
        let ok = |tags: &[&str]| validate_bio(&tags.iter().map(|t| t.to_string()).collect::<Vec<_>>());
        assert!(ok(&["O", "B-PER", "I-PER", "O", "B-LOC"]).is_ok());
        assert!(ok(&["B-ORG", "I-ORG", "I-ORG"]).is_ok());
        assert!(ok(&["O", "I-PER"]).is_err());
        assert!(ok(&["B-PER", "I-LOC"]).is_err());
        assert!(ok(&["B-XYZ"]).is_err());
        assert!(ok(&["bogus"]).is_err());
        assert!(ok(&[]).is_ok());
    }
}
