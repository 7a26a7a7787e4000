//! Plain CSV records: a header row naming the leads, one row per sample,
//! values in mV. Columns whose names are not leads (a time axis, say) are
//! ignored. An optional sidecar `<stem>.label` holds the class label.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lead::{Label, LeadId};
use crate::record::EcgRecord;

pub fn sidecar_label_path(path: &Path) -> PathBuf {
    path.with_extension("label")
}

fn record_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads a CSV record. The label comes from the sidecar file when present.
pub fn read_csv(path: &Path, sample_rate_hz: f64) -> Result<EcgRecord> {
    let label = match fs::read_to_string(sidecar_label_path(path)) {
        Ok(s) => s.parse()?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Label::Unknown,
        Err(e) => return Err(Error::io(sidecar_label_path(path), e)),
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, record_id(path), label, sample_rate_hz)
}

pub fn read_csv_from(
    reader: impl std::io::Read,
    record_id: String,
    label: Label,
    sample_rate_hz: f64,
) -> Result<EcgRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();

    let mut columns: Vec<Option<usize>> = vec![None; LeadId::ALL.len()];
    for (c, name) in headers.iter().enumerate() {
        if let Ok(lead) = name.parse::<LeadId>() {
            if columns[lead.index()].replace(c).is_some() {
                return Err(Error::DuplicateLead(lead));
            }
        }
    }
    let columns: Vec<usize> = LeadId::ALL
        .iter()
        .map(|&l| columns[l.index()].ok_or(Error::MissingLead(l)))
        .collect::<Result<_>>()?;

    let mut leads: Vec<Vec<f64>> = vec![Vec::new(); LeadId::ALL.len()];
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Csv(e.to_string()))?;
        let row_no = i + 2;
        if row.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: row_no,
                found: row.len(),
                expected: headers.len(),
            });
        }
        for (k, &c) in columns.iter().enumerate() {
            let cell = &row[c];
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: row_no,
                column: headers[c].to_string(),
                value: cell.to_string(),
            })?;
            leads[k].push(v);
        }
    }
    EcgRecord::new(record_id, label, sample_rate_hz, leads)
}

/// Writes the record in canonical lead order with round-trip exact floats.
pub fn write_csv(record: &EcgRecord, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(LeadId::ALL.iter().map(|l| l.name())).map_err(csv_err)?;
    for t in 0..record.duration_samples() {
        w.write_record(LeadId::ALL.iter().map(|&l| record.lead(l)[t].to_string()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    if record.label != Label::Unknown {
        let p = sidecar_label_path(path);
        fs::write(&p, record.label.name()).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    fn table(n: usize, skip: Option<&str>) -> String {
        let names: Vec<&str> = LeadId::ALL.iter().map(|l| l.name()).filter(|n| Some(*n) != skip).collect();
        let mut s = names.join(",");
        s.push('\n');
        for t in 0..n {
            let row: Vec<String> = (0..names.len()).map(|k| format!("{}", (t + k) as f64 * 0.001)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    #[test]
    fn reads_five_thousand_rows() {
        let rec = read_csv_from(table(5000, None).as_bytes(), "a".into(), Label::Unknown, 500.0).unwrap();
        assert_eq!(rec.duration_samples(), 5000);
        assert_eq!(rec.label, Label::Unknown);
        assert_eq!(rec.lead(LeadId::V6)[1], 0.012);
    }

    #[test]
    fn missing_v6() {
        let r = read_csv_from(table(1000, Some("V6")).as_bytes(), "a".into(), Label::Unknown, 500.0);
        assert!(matches!(r, Err(Error::MissingLead(LeadId::V6))));
    }

    #[test]
    fn duplicate_non_numeric_and_ragged() {
        let dup: String = table(1000, None)
            .lines()
            .enumerate()
            .map(|(i, l)| if i == 0 { format!("{l},V1\n") } else { format!("{l},0\n") })
            .collect();
        let r = read_csv_from(dup.as_bytes(), "a".into(), Label::Unknown, 500.0);
        assert!(matches!(r, Err(Error::DuplicateLead(LeadId::V1))), "{r:?}");

        let bad = table(1000, None).replacen("0.001,", "abc,", 1);
        let r = read_csv_from(bad.as_bytes(), "a".into(), Label::Unknown, 500.0);
        assert!(matches!(r, Err(Error::NonNumeric { row: 2, .. })), "{r:?}");

        let ragged = table(1000, None).replacen("\n0.001,", "\n0.001,7,", 1);
        let r = read_csv_from(ragged.as_bytes(), "a".into(), Label::Unknown, 500.0);
        assert!(matches!(r, Err(Error::RaggedRow { row: 3, found: 13, expected: 12 })), "{r:?}");
    }

    #[test]
    fn round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let leads: Vec<Vec<f64>> = (0..12).map(|k| (0..1000).map(|t| (t as f64 * 0.37 + k as f64).sin() / 3.0).collect()).collect();
        let rec = EcgRecord::new("rec", Label::Lvh, 500.0, leads).unwrap();
        let p = dir.path().join("rec.csv");
        write_csv(&rec, &p).unwrap();
        let back = read_csv(&p, 500.0).unwrap();
        assert_eq!(back, rec);
    }
}
