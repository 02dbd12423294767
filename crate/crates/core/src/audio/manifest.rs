//! Line-oriented dataset manifests: `path,label,speaker_id,split` per line,
//! `#` starts a comment line.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn other(self) -> Self {
        match self {
            Split::Train => Split::Test,
            Split::Test => Split::Train,
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("split must be 'train' or 'test', got '{s}'")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
    pub speaker_id: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub vocabulary: Vocabulary,
    pub entries: Vec<ManifestEntry>,
    /// Directory relative entry paths are resolved against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn find(&self, path: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.path == path)
    }

    /// Speaker ids in order of first appearance.
    pub fn speakers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.speaker_id) {
                out.push(e.speaker_id.clone());
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# path,label,speaker_id,split\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.path, e.label, e.speaker_id, e.split));
        }
        out
    }
}

/// Parses manifest text. Line numbers in errors are 1-based.
pub fn parse_manifest(text: &str, vocabulary: &Vocabulary, base_dir: &Path) -> Result<DatasetManifest> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Syntax {
                line,
                reason: format!("expected 4 comma-separated fields, found {}", fields.len()),
            });
        }
        let [path, label, speaker, split] = [fields[0], fields[1], fields[2], fields[3]];
        if path.is_empty() || speaker.is_empty() {
            return Err(Error::Syntax {
                line,
                reason: "path and speaker_id must be non-empty".into(),
            });
        }
        if vocabulary.index_of(label).is_none() {
            return Err(Error::Vocabulary {
                line,
                label: label.to_string(),
                vocabulary: vocabulary.to_string(),
            });
        }
        let split = split.parse().map_err(|reason| Error::Syntax { line, reason })?;
        if !seen.insert(path.to_string()) {
            return Err(Error::DuplicatePath {
                line,
                path: path.to_string(),
            });
        }
        entries.push(ManifestEntry {
            path: path.to_string(),
            label: label.to_string(),
            speaker_id: speaker.to_string(),
            split,
        });
    }
    if entries.is_empty() {
        return Err(Error::Empty("manifest has no entries".into()));
    }
    Ok(DatasetManifest {
        vocabulary: vocabulary.clone(),
        entries,
        base_dir: base_dir.to_path_buf(),
    })
}

pub fn load_manifest(path: &Path, vocabulary: &Vocabulary) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, vocabulary, base).map_err(|e| e.in_file(path))
}
