use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::substitute::{Category, SafewordBank, SubstitutionRecord};
use crate::audio::read_wav;
use crate::error::{Error, Result};

/// One line of a keyword configuration file (a JSON array of these).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordEntry {
    pub label: String,
    pub category: Category,
    /// Relative paths resolve against the configuration file's directory.
    pub enrollment_clip: PathBuf,
}

/// One entry of a safeword directory's `index.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafewordEntry {
    pub word: String,
    pub category: Category,
    pub file: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Read a keyword configuration, resolving clip paths.
pub fn load_keyword_config(path: &Path) -> Result<Vec<KeywordEntry>> {
    let entries: Vec<KeywordEntry> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = HashMap::new();
    for e in &entries {
        if seen.insert(e.label.clone(), ()).is_some() {
            return Err(Error::Configuration(format!("keyword '{}' listed twice", e.label)));
        }
    }
    Ok(entries
        .into_iter()
        .map(|e| KeywordEntry {
            enrollment_clip: resolve(base, &e.enrollment_clip),
            ..e
        })
        .collect())
}

/// Load every safeword listed in `dir/index.json`.
pub fn load_safeword_bank(dir: &Path) -> Result<SafewordBank> {
    let index = dir.join("index.json");
    let entries: Vec<SafewordEntry> = serde_json::from_reader(BufReader::new(File::open(&index)?))?;
    let mut bank = SafewordBank::new();
    for e in entries {
        let audio = read_wav(&resolve(dir, &e.file))?;
        bank.insert(e.category, &e.word, audio)?;
    }
    Ok(bank)
}

/// Write records as JSON lines.
pub fn write_substitution_log(path: &Path, records: &[SubstitutionRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a JSON-lines substitution log; blank lines are skipped.
pub fn read_substitution_log(path: &Path) -> Result<Vec<SubstitutionRecord>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            Error::Format(format!("{}:{}: {e}", path.display(), n + 1))
        })?);
    }
    Ok(out)
}
