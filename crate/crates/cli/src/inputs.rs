use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bsw_core::io::ptbxl::read_ptbxl_index;
use bsw_core::io::{read_csv, read_wfdb};
use bsw_core::{EcgRecord, Label};
use walkdir::WalkDir;

#[derive(Debug, Clone)]
pub enum Source {
    Wfdb(PathBuf),
    Csv(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RecordTask {
    pub id: String,
    pub source: Source,
    /// Label from an external index; `None` keeps what the reader found.
    pub label: Option<Label>,
}

impl RecordTask {
    pub fn load(&self, csv_rate: f64) -> bsw_core::Result<EcgRecord> {
        let mut rec = match &self.source {
            Source::Wfdb(p) => read_wfdb(p)?,
            Source::Csv(p) => read_csv(p, csv_rate)?,
        };
        rec.record_id = self.id.clone();
        if let Some(l) = self.label {
            rec.label = l;
        }
        Ok(rec)
    }
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("{} is not a readable directory", dir.display());
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("walking {}", dir.display()))?;
        if entry.file_type().is_file() {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// WFDB headers and CSV files under `dir`, sorted by path. `skip` excludes
/// the label table when it lives in the same directory.
pub fn discover_records(dir: &Path, skip: Option<&Path>) -> Result<Vec<RecordTask>> {
    let skip = skip.and_then(|p| p.canonicalize().ok());
    let mut tasks = Vec::new();
    for p in sorted_files(dir)? {
        if skip.is_some() && p.canonicalize().ok() == skip {
            continue;
        }
        let source = match p.extension().and_then(|e| e.to_str()) {
            Some("hea") => Source::Wfdb(p.clone()),
            Some("csv") if stem(&p) != "labels" => Source::Csv(p.clone()),
            _ => continue,
        };
        tasks.push(RecordTask { id: stem(&p), source, label: None });
    }
    Ok(tasks)
}

pub fn ptbxl_records(root: &Path) -> Result<Vec<RecordTask>> {
    let entries = read_ptbxl_index(root)?;
    Ok(entries
        .into_iter()
        .map(|e| RecordTask {
            id: format!("{:05}", e.ecg_id),
            source: Source::Wfdb(e.header_path(root)),
            label: Some(e.label),
        })
        .collect())
}

/// `record_id,label` table.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Label>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() < 2 {
            bail!("{}: expected record_id,label rows", path.display());
        }
        out.insert(row[0].to_string(), row[1].parse::<Label>()?);
    }
    Ok(out)
}

/// One id per line; blank lines and `#` comments ignored.
pub fn read_id_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// JSON files under `dir` whose names end in `suffix`, sorted.
pub fn json_files(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    Ok(sorted_files(dir)?
        .into_iter()
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(suffix)))
        .collect())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
