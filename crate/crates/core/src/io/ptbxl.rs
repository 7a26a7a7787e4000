//! Index of a local PTB-XL copy (`ptbxl_database.csv`), reduced to the
//! Normal and LVH pools.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lead::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct PtbxlEntry {
    pub ecg_id: u64,
    pub patient_id: u64,
    pub label: Label,
    /// Header path of the 500 Hz record, relative to the dataset root, without extension.
    pub filename_hr: String,
    pub strat_fold: u32,
}

impl PtbxlEntry {
    pub fn header_path(&self, root: &Path) -> PathBuf {
        root.join(format!("{}.hea", self.filename_hr))
    }
}

/// Parses the `scp_codes` column, a Python dict literal such as
/// `{'NORM': 100.0, 'SR': 0.0}`.
pub fn parse_scp_codes(s: &str) -> Vec<(String, f64)> {
    s.trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .split(',')
        .filter_map(|kv| {
            let (k, v) = kv.split_once(':')?;
            let k = k.trim().trim_matches(|c| c == '\'' || c == '"').to_string();
            Some((k, v.trim().parse().ok()?))
        })
        .collect()
}

/// LVH when the code is present at any likelihood; Normal when NORM is
/// asserted at 100 and LVH is absent; everything else is left out.
pub fn label_from_scp(codes: &[(String, f64)]) -> Label {
    if codes.iter().any(|(k, _)| k == "LVH") {
        Label::Lvh
    } else if codes.iter().any(|(k, v)| k == "NORM" && *v >= 100.0) {
        Label::Normal
    } else {
        Label::Unknown
    }
}

/// Reads the database index and keeps the first Normal or LVH record of each
/// patient, in `ecg_id` order.
pub fn read_ptbxl_index(root: &Path) -> Result<Vec<PtbxlEntry>> {
    let path = root.join("ptbxl_database.csv");
    let mut rdr = csv::Reader::from_path(&path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv(format!("{} has no column {name}", path.display())))
    };
    let (c_id, c_patient, c_scp, c_hr, c_fold) =
        (col("ecg_id")?, col("patient_id")?, col("scp_codes")?, col("filename_hr")?, col("strat_fold")?);

    let mut entries = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Csv(e.to_string()))?;
        let num = |c: usize| -> Result<f64> {
            row[c].trim().parse().map_err(|_| Error::NonNumeric {
                row: i + 2,
                column: headers[c].to_string(),
                value: row[c].to_string(),
            })
        };
        let label = label_from_scp(&parse_scp_codes(&row[c_scp]));
        if label == Label::Unknown {
            continue;
        }
        entries.push(PtbxlEntry {
            ecg_id: num(c_id)? as u64,
            patient_id: num(c_patient)? as u64,
            label,
            filename_hr: row[c_hr].to_string(),
            strat_fold: num(c_fold)? as u32,
        });
    }
    entries.sort_by_key(|e| e.ecg_id);
    let mut seen = HashSet::new();
    entries.retain(|e| seen.insert(e.patient_id));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scp_codes() {
        let c = parse_scp_codes("{'NORM': 100.0, 'SR': 0.0}");
        assert_eq!(c, vec![("NORM".to_string(), 100.0), ("SR".to_string(), 0.0)]);
        assert_eq!(label_from_scp(&c), Label::Normal);
        assert_eq!(label_from_scp(&parse_scp_codes("{'LVH': 50.0, 'NORM': 100.0}")), Label::Lvh);
        assert_eq!(label_from_scp(&parse_scp_codes("{'NORM': 80.0}")), Label::Unknown);
        assert_eq!(label_from_scp(&parse_scp_codes("{}")), Label::Unknown);
    }

    #[test]
    fn one_record_per_patient() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("ptbxl_database.csv"),
            "ecg_id,patient_id,scp_codes,strat_fold,filename_lr,filename_hr\n\
             2,7.0,\"{'NORM': 100.0}\",3,a,records500/00000/00002_hr\n\
             1,7.0,\"{'NORM': 100.0}\",3,a,records500/00000/00001_hr\n\
             3,8.0,\"{'LVH': 100.0, 'SR': 0.0}\",10,a,records500/00000/00003_hr\n\
             4,9.0,\"{'IMI': 100.0}\",1,a,records500/00000/00004_hr\n",
        )
        .unwrap();
        let e = read_ptbxl_index(dir.path()).unwrap();
        assert_eq!(e.iter().map(|e| e.ecg_id).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(e[1].label, Label::Lvh);
        assert_eq!(e[1].strat_fold, 10);
        assert!(e[0].header_path(dir.path()).ends_with("records500/00000/00001_hr.hea"));
    }
}
