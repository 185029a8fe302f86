//! Shipped input data: the Kummer quartic and the Gram matrices of `U` and
//! `E8(-1)`. Setting `ULRICH_CORPUS_DIR` reads the same file names from
//! another directory instead.

use std::path::PathBuf;

use thiserror::Error;

pub const CORPUS_ENV: &str = "ULRICH_CORPUS_DIR";

const KUMMER_QUARTIC: &str = include_str!("../corpus/kummer_quartic.txt");
const U_GRAM: &str = include_str!("../corpus/u.gram");
const E8_MINUS_ONE_GRAM: &str = include_str!("../corpus/e8_minus1.gram");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry {0:?}")]
    Unknown(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Matrix { line: usize, msg: String },
}

/// A named corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    KummerQuartic,
    UGram,
    E8MinusOneGram,
}

impl Entry {
    pub fn from_name(name: &str) -> Result<Self, CorpusError> {
        match name {
            "kummer-quartic" => Ok(Entry::KummerQuartic),
            "u" => Ok(Entry::UGram),
            "e8-minus-1" => Ok(Entry::E8MinusOneGram),
            other => Err(CorpusError::Unknown(other.to_string())),
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Entry::KummerQuartic => "kummer_quartic.txt",
            Entry::UGram => "u.gram",
            Entry::E8MinusOneGram => "e8_minus1.gram",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            Entry::KummerQuartic => KUMMER_QUARTIC,
            Entry::UGram => U_GRAM,
            Entry::E8MinusOneGram => E8_MINUS_ONE_GRAM,
        }
    }
}

/// Text of a corpus entry, honoring the directory override.
pub fn load(entry: Entry) -> Result<String, CorpusError> {
    match std::env::var_os(CORPUS_ENV) {
        Some(dir) => {
            let path = PathBuf::from(dir).join(entry.file_name());
            std::fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })
        }
        None => Ok(entry.builtin().to_string()),
    }
}

/// The shipped text, ignoring any override.
pub fn builtin(entry: Entry) -> &'static str {
    entry.builtin()
}

/// Parses a whitespace-separated integer matrix, one row per line. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_integer_matrix(text: &str) -> Result<Vec<Vec<i64>>, CorpusError> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Matrix {
                line: k + 1,
                msg: e.to_string(),
            })?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CorpusError::Matrix {
                    line: k + 1,
                    msg: format!("expected {} entries, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
