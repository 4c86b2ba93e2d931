use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::aggregate::AggregateEstimate;
use super::report::KeywordReport;
use crate::error::{Error, Result};

/// One word per line; blank lines and lines starting with `#` are ignored.
pub fn load_vocabulary(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen.insert(line.to_string()) {
            return Err(Error::Configuration(format!("vocabulary lists '{line}' twice")));
        }
        words.push(line.to_string());
    }
    Ok(words)
}

fn write_lines<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports(path: &Path, reports: &[KeywordReport]) -> Result<()> {
    write_lines(path, reports)
}

pub fn write_aggregates(path: &Path, estimates: &[AggregateEstimate]) -> Result<()> {
    write_lines(path, estimates)
}

/// Read JSON-lines reports; blank lines are skipped.
pub fn read_reports(path: &Path) -> Result<Vec<KeywordReport>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}
