//! Manifest (JSON) and record (JSONL) files.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{Corpus, CorpusManifest, UtteranceRecord};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Accepts either the manifest file itself or the directory holding it.
fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

pub fn read_manifest(path: &Path) -> Result<CorpusManifest> {
    let path = manifest_path(path);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: CorpusManifest = serde_json::from_str(&text)
        .map_err(|e| Error::json(format!("manifest {}", path.display()), e))?;
    manifest.validate()?;
    Ok(manifest)
}

fn read_records(path: &Path) -> Result<Vec<UtteranceRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), lineno + 1), e))?;
        let utterance_id = value
            .get("utterance_id")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                Error::validation(format!(
                    "{}:{}: record is missing field `utterance_id`",
                    path.display(),
                    lineno + 1
                ))
            })?;
        let record: UtteranceRecord =
            serde_json::from_value(value).map_err(|e| Error::record(&utterance_id, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Loads and validates a corpus. `path` is the manifest file or its directory.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let manifest_file = manifest_path(path);
    let manifest = read_manifest(&manifest_file)?;
    let base = manifest_file.parent().unwrap_or(Path::new(".")).to_path_buf();
    let parts = manifest
        .datasets
        .par_iter()
        .map(|entry| read_records(&base.join(&entry.records)))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(manifest, parts)
}

/// Writes `manifest.json` and every record file under `dir`.
///
/// Output is canonical: struct fields in declaration order, maps sorted by
/// key, floats in shortest round-trip form.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (entry, records) in corpus.manifest.datasets.iter().zip(&corpus.parts) {
        let path = dir.join(&entry.records);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for record in records {
            serde_json::to_writer(&mut w, record)
                .map_err(|e| Error::json(format!("record {}", record.utterance_id), e))?;
            w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    let manifest_file = dir.join(MANIFEST_FILE);
    write_json(&manifest_file, &corpus.manifest)?;
    Ok(manifest_file)
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
