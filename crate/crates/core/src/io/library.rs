//! JSON persistence for prototype libraries.
//!
//! ```json
//! { "format_version": 1,
//!   "Normal": { "V1": { "beat_length": 500,
//!                       "prototypes": [ { "occurrence": 3, "samples": [...], "lineage": [...] } ] } },
//!   "LVH": { ... } }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lead::{ClassLabel, LeadId};
use crate::prototype::{LibrarySet, Prototype, PrototypeLibrary};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PrototypeEntry {
    occurrence: i64,
    samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lineage: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryEntry {
    beat_length: usize,
    prototypes: Vec<PrototypeEntry>,
}

#[derive(Serialize, Deserialize)]
struct LibraryFile {
    format_version: u32,
    #[serde(flatten)]
    classes: BTreeMap<ClassLabel, BTreeMap<LeadId, LibraryEntry>>,
}

fn check(entry: &LibraryEntry) -> Result<()> {
    for p in &entry.prototypes {
        if p.occurrence <= 0 {
            return Err(Error::InvalidOccurrence(p.occurrence));
        }
        if p.samples.len() != entry.beat_length {
            return Err(Error::BeatLengthMismatch {
                declared: entry.beat_length,
                found: p.samples.len(),
            });
        }
        if !p.lineage.is_empty() && p.lineage.len() as i64 != p.occurrence {
            return Err(Error::LibraryParse(format!(
                "lineage lists {} records but occurrence is {}",
                p.lineage.len(),
                p.occurrence
            )));
        }
        if p.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::LibraryParse("non-finite prototype sample".into()));
        }
    }
    Ok(())
}

pub fn library_to_json(set: &LibrarySet) -> Result<String> {
    let mut classes: BTreeMap<ClassLabel, BTreeMap<LeadId, LibraryEntry>> = BTreeMap::new();
    for lib in set.iter() {
        let entry = LibraryEntry {
            beat_length: lib.beat_length,
            prototypes: lib
                .prototypes
                .iter()
                .map(|p| PrototypeEntry {
                    occurrence: p.occurrence as i64,
                    samples: p.samples.clone(),
                    lineage: p.lineage.clone(),
                })
                .collect(),
        };
        check(&entry)?;
        classes.entry(lib.class_label).or_default().insert(lib.lead, entry);
    }
    let file = LibraryFile {
        format_version: FORMAT_VERSION,
        classes,
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::LibraryParse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn library_from_json(text: &str) -> Result<LibrarySet> {
    // Check the version before the body so old files fail with a clear error.
    let probe: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::LibraryParse(e.to_string()))?;
    let found = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::LibraryParse("missing format_version".into()))?;
    if found != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: found as u32,
            expected: FORMAT_VERSION,
        });
    }
    let file: LibraryFile = serde_json::from_value(probe).map_err(|e| Error::LibraryParse(e.to_string()))?;
    let mut set = LibrarySet::default();
    for (class_label, leads) in file.classes {
        for (lead, entry) in leads {
            check(&entry)?;
            set.insert(PrototypeLibrary {
                lead,
                class_label,
                beat_length: entry.beat_length,
                prototypes: entry
                    .prototypes
                    .into_iter()
                    .map(|p| Prototype {
                        samples: p.samples,
                        occurrence: p.occurrence as usize,
                        lineage: p.lineage,
                    })
                    .collect(),
            });
        }
    }
    Ok(set)
}

pub fn save_library(set: &LibrarySet, path: &Path) -> Result<()> {
    super::write_atomic(path, library_to_json(set)?.as_bytes())
}

pub fn load_library(path: &Path) -> Result<LibrarySet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    library_from_json(&text)
}
