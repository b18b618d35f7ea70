//! Keyboard-proximity character substitution, mirroring the augmenter style
//! used for short label-aligned NER sentences: substitution only, so token
//! counts and tag alignment are preserved.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::Deserialize;

use crate::textcore::Language;

const BUILTIN_LAYOUTS: [(&str, &str); 5] = [
    ("qwerty-en", include_str!("../layouts/qwerty-en.json")),
    ("qwertz-de", include_str!("../layouts/qwertz-de.json")),
    ("azerty-fr", include_str!("../layouts/azerty-fr.json")),
    ("qwerty-es", include_str!("../layouts/qwerty-es.json")),
    ("qwerty-tr", include_str!("../layouts/qwerty-tr.json")),
];

#[derive(Debug, thiserror::Error)]
pub enum LayoutError {
    #[error("unknown layout {name:?}; available layouts: {}", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("layout {name:?}: key {key:?} must be a single character")]
    InvalidKey { name: String, key: String },
    #[error("layout {name:?}: duplicate key {key:?}")]
    DuplicateKey { name: String, key: char },
    #[error("layout {name:?}: asymmetric adjacency {a:?} -> {b:?} without {b:?} -> {a:?}")]
    Asymmetric { name: String, a: char, b: char },
    #[error("layout {name:?}: key {key:?} is adjacent to itself")]
    SelfAdjacent { name: String, key: char },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Per-language key-proximity table. Adjacency is symmetric and irreflexive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyboardLayout {
    name: String,
    language: Language,
    adjacency: BTreeMap<char, BTreeSet<char>>,
}

#[derive(Deserialize)]
struct LayoutFile {
    name: String,
    language: Language,
    #[serde(default)]
    rows: Vec<Vec<String>>,
    /// Explicit adjacency override; when present it replaces the
    /// geometry-derived table and is validated for symmetry.
    #[serde(default)]
    adjacency: Option<BTreeMap<String, Vec<String>>>,
}

impl KeyboardLayout {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Keys physically adjacent to `key` (same row left/right plus the three
    /// nearest keys in each neighboring row).
    pub fn neighbors(&self, key: char) -> Option<&BTreeSet<char>> {
        self.adjacency.get(&key).filter(|s| !s.is_empty())
    }

    pub fn contains(&self, key: char) -> bool {
        self.neighbors(key).is_some()
    }

    fn from_file(file: LayoutFile) -> Result<KeyboardLayout, LayoutError> {
        let name = file.name.clone();
        let single = |key: &str| -> Result<char, LayoutError> {
            let mut chars = key.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(LayoutError::InvalidKey {
                    name: name.clone(),
                    key: key.to_string(),
                }),
            }
        };

        let mut adjacency: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();
        if let Some(explicit) = file.adjacency {
            for (key, neighbors) in &explicit {
                let k = single(key)?;
                let set = adjacency.entry(k).or_default();
                for n in neighbors {
                    set.insert(single(n)?);
                }
            }
        } else {
            let rows: Vec<Vec<char>> = file
                .rows
                .iter()
                .map(|row| row.iter().map(|k| single(k)).collect())
                .collect::<Result<_, _>>()?;
            let mut seen = BTreeSet::new();
            for row in &rows {
                for &k in row {
                    if !seen.insert(k) {
                        return Err(LayoutError::DuplicateKey { name, key: k });
                    }
                }
            }
            for (r, row) in rows.iter().enumerate() {
                for (i, &k) in row.iter().enumerate() {
                    let set = adjacency.entry(k).or_default();
                    if i > 0 {
                        set.insert(row[i - 1]);
                    }
                    if i + 1 < row.len() {
                        set.insert(row[i + 1]);
                    }
                    for other in [r.checked_sub(1), Some(r + 1)].into_iter().flatten() {
                        if let Some(other_row) = rows.get(other) {
                            let lo = i.saturating_sub(1);
                            for &n in other_row.iter().skip(lo).take(i + 2 - lo) {
                                set.insert(n);
                            }
                        }
                    }
                }
            }
        }

        for (&k, neighbors) in &adjacency {
            if neighbors.contains(&k) {
                return Err(LayoutError::SelfAdjacent { name, key: k });
            }
            for &n in neighbors {
                if !adjacency.get(&n).is_some_and(|back| back.contains(&k)) {
                    return Err(LayoutError::Asymmetric { name, a: k, b: n });
                }
            }
        }

        Ok(KeyboardLayout {
            name: file.name,
            language: file.language,
            adjacency,
        })
    }
}

pub fn builtin_layout_names() -> Vec<String> {
    BUILTIN_LAYOUTS.iter().map(|(n, _)| n.to_string()).collect()
}

/// Load a shipped layout by name, or any layout from a `.json` path.
pub fn load_layout(name: &str) -> Result<KeyboardLayout, LayoutError> {
    if let Some((_, json)) = BUILTIN_LAYOUTS.iter().find(|(n, _)| *n == name) {
        let file: LayoutFile = serde_json::from_str(json)?;
        return KeyboardLayout::from_file(file);
    }
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "json") && path.exists() {
        return load_layout_from_path(path);
    }
    Err(LayoutError::Unknown {
        name: name.to_string(),
        available: builtin_layout_names(),
    })
}

pub fn load_layout_from_path(path: &Path) -> Result<KeyboardLayout, LayoutError> {
    let text = std::fs::read_to_string(path)?;
    let file: LayoutFile = serde_json::from_str(&text)?;
    KeyboardLayout::from_file(file)
}

/// Replace exactly one character of `word` with a uniformly chosen adjacent
/// key. Positions are chosen uniformly among those whose (lowercased)
/// character exists in the layout; case is preserved. Words with no
/// substitutable position pass through unchanged.
pub fn keyboard_perturb<R: Rng>(word: &str, layout: &KeyboardLayout, rng: &mut R) -> String {
    let chars: Vec<char> = word.chars().collect();
    let positions: Vec<usize> = chars
        .iter()
        .enumerate()
        .filter(|(_, &c)| layout.contains(lower(c)))
        .map(|(i, _)| i)
        .collect();
    if positions.is_empty() {
        return word.to_string();
    }
    let pos = positions[rng.gen_range(0..positions.len())];
    let original = chars[pos];
    let neighbors: Vec<char> = layout
        .neighbors(lower(original))
        .expect("position was filtered on layout membership")
        .iter()
        .copied()
        .collect();
    let replacement = neighbors[rng.gen_range(0..neighbors.len())];
    let replacement = if original.is_uppercase() {
        replacement.to_uppercase().next().unwrap_or(replacement)
    } else {
        replacement
    };
    let mut out = chars;
    out[pos] = replacement;
    out.into_iter().collect()
}

fn lower(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}
