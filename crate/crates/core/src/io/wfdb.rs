//! Reader and writer for the single-segment, format-16 subset of WFDB that
//! PTB-XL ships: one `.hea` header and one interleaved `.dat` file.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lead::{Label, LeadId};
use crate::record::EcgRecord;

const DEFAULT_GAIN: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u32,
    pub byte_offset: u64,
    pub gain: f64,
    pub baseline: f64,
    /// Multiplier from physical units to millivolts.
    pub to_mv: f64,
    pub lead: LeadId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WfdbHeader {
    pub record_name: String,
    pub sample_rate_hz: f64,
    pub n_samples: Option<usize>,
    pub signals: Vec<SignalSpec>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        line,
        reason: reason.into(),
    }
}

/// Leading decimal number of a token such as `500/1000` or `500(0)`.
fn leading_number(tok: &str) -> Option<f64> {
    let end = tok
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E'))
        .unwrap_or(tok.len());
    tok[..end].parse().ok()
}

fn unit_scale(unit: &str, line: usize) -> Result<f64> {
    match unit {
        "" | "mV" | "mv" => Ok(1.0),
        "uV" | "uv" | "µV" | "μV" => Ok(1e-3),
        "V" => Ok(1e3),
        other => Err(malformed(line, format!("unsupported unit {other:?}"))),
    }
}

/// `gain[(baseline)][/units]`; baseline falls back to `adc_zero`.
fn parse_gain(tok: &str, adc_zero: f64, line: usize) -> Result<(f64, f64, f64)> {
    let (value, unit) = tok.split_once('/').unwrap_or((tok, ""));
    let (gain_s, baseline) = match value.split_once('(') {
        Some((g, rest)) => {
            let b = rest
                .strip_suffix(')')
                .and_then(|b| b.parse::<f64>().ok())
                .ok_or_else(|| malformed(line, format!("bad baseline in {tok:?}")))?;
            (g, b)
        }
        None => (value, adc_zero),
    };
    let gain: f64 = gain_s
        .parse()
        .map_err(|_| malformed(line, format!("bad gain {tok:?}")))?;
    let gain = if gain == 0.0 { DEFAULT_GAIN } else { gain };
    Ok((gain, baseline, unit_scale(unit, line)?))
}

fn parse_format(tok: &str, line: usize) -> Result<(u32, u64)> {
    let (head, offset) = match tok.split_once('+') {
        Some((h, o)) => (h, o.parse().map_err(|_| malformed(line, format!("bad byte offset {tok:?}")))?),
        None => (tok, 0),
    };
    let code = head.split(['x', ':']).next().unwrap_or("");
    let format: u32 = code
        .parse()
        .map_err(|_| malformed(line, format!("bad storage format {tok:?}")))?;
    if format != 16 {
        return Err(Error::UnsupportedFormat(tok.to_string()));
    }
    Ok((format, offset))
}

pub fn parse_header(text: &str) -> Result<WfdbHeader> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (no, record_line) = lines.next().ok_or_else(|| malformed(1, "empty header"))?;
    let toks: Vec<&str> = record_line.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(malformed(no, "record line needs a name and signal count"));
    }
    if toks[0].contains('/') {
        return Err(Error::UnsupportedFormat("multi-segment record".into()));
    }
    let n_sig: usize = toks[1]
        .parse()
        .map_err(|_| malformed(no, format!("bad signal count {:?}", toks[1])))?;
    let sample_rate_hz = match toks.get(2) {
        Some(t) => leading_number(t).filter(|f| *f > 0.0).ok_or_else(|| malformed(no, format!("bad sampling frequency {t:?}")))?,
        None => 250.0,
    };
    let n_samples = match toks.get(3) {
        Some(t) => Some(t.parse().map_err(|_| malformed(no, format!("bad sample count {t:?}")))?),
        None => None,
    };
    if n_sig != LeadId::ALL.len() {
        return Err(Error::LeadCountMismatch(n_sig));
    }

    let mut signals = Vec::with_capacity(n_sig);
    for (no, line) in lines.by_ref().take(n_sig) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(malformed(no, "signal line needs a file name and format"));
        }
        let (format, byte_offset) = parse_format(toks[1], no)?;
        let adc_zero = match toks.get(4) {
            Some(t) => t.parse().map_err(|_| malformed(no, format!("bad ADC zero {t:?}")))?,
            None => 0.0,
        };
        let (gain, baseline, to_mv) = match toks.get(2) {
            Some(t) => parse_gain(t, adc_zero, no)?,
            None => (DEFAULT_GAIN, adc_zero, 1.0),
        };
        let description = toks.get(8..).map(|d| d.join(" ")).unwrap_or_default();
        let lead: LeadId = description.parse()?;
        signals.push(SignalSpec {
            file_name: toks[0].to_string(),
            format,
            byte_offset,
            gain,
            baseline,
            to_mv,
            lead,
        });
    }
    if signals.len() != n_sig {
        return Err(Error::LeadCountMismatch(signals.len()));
    }
    Ok(WfdbHeader {
        record_name: toks[0].to_string(),
        sample_rate_hz,
        n_samples,
        signals,
    })
}

/// Reads a record and returns it with leads in canonical order, in mV.
pub fn read_wfdb(header_path: &Path) -> Result<EcgRecord> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = parse_header(&text)?;

    let mut slots: Vec<Option<usize>> = vec![None; LeadId::ALL.len()];
    for (i, s) in header.signals.iter().enumerate() {
        let slot = &mut slots[s.lead.index()];
        if slot.is_some() {
            return Err(Error::DuplicateLead(s.lead));
        }
        *slot = Some(i);
    }

    let first = &header.signals[0];
    if header
        .signals
        .iter()
        .any(|s| s.file_name != first.file_name || s.byte_offset != first.byte_offset)
    {
        return Err(Error::UnsupportedFormat("signals spread over several files".into()));
    }
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let dat: PathBuf = dir.join(&first.file_name);
    if !dat.is_file() {
        return Err(Error::MissingSignalFile(dat));
    }
    let bytes = fs::read(&dat).map_err(|e| Error::io(&dat, e))?;
    let bytes = bytes.get(first.byte_offset as usize..).unwrap_or(&[]);

    let n_sig = header.signals.len();
    let frames_in_file = bytes.len() / (2 * n_sig);
    let n = header.n_samples.unwrap_or(frames_in_file);
    if n > frames_in_file {
        return Err(Error::InvalidRecord(format!(
            "{} holds {frames_in_file} frames, header declares {n}",
            dat.display()
        )));
    }

    let mut leads = vec![Vec::with_capacity(n); n_sig];
    for frame in bytes.chunks_exact(2 * n_sig).take(n) {
        for (k, s) in header.signals.iter().enumerate() {
            let raw = i16::from_le_bytes([frame[2 * k], frame[2 * k + 1]]) as f64;
            leads[s.lead.index()].push((raw - s.baseline) / s.gain * s.to_mv);
        }
    }
    let record_id = header_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(header.record_name);
    EcgRecord::new(record_id, Label::Unknown, header.sample_rate_hz, leads)
}

/// Writes `record` as `<dir>/<record_id>.hea` + `.dat` with the given gain in
/// ADC units per mV and zero baseline. Returns the header path.
pub fn write_wfdb(record: &EcgRecord, dir: &Path, gain: f64) -> Result<PathBuf> {
    let n = record.duration_samples();
    let dat_name = format!("{}.dat", record.record_id);
    let mut bytes = Vec::with_capacity(n * 24);
    for t in 0..n {
        for lead in LeadId::ALL {
            let raw = (record.lead(lead)[t] * gain).round().clamp(i16::MIN as f64 + 1.0, i16::MAX as f64);
            bytes.extend_from_slice(&(raw as i16).to_le_bytes());
        }
    }
    let mut hea = format!("{} 12 {} {}\n", record.record_id, record.sample_rate_hz(), n);
    for lead in LeadId::ALL {
        hea.push_str(&format!("{dat_name} 16 {gain}(0)/mV 16 0 0 0 0 {lead}\n"));
    }
    let dat = dir.join(&dat_name);
    fs::write(&dat, bytes).map_err(|e| Error::io(&dat, e))?;
    let hea_path = dir.join(format!("{}.hea", record.record_id));
    fs::write(&hea_path, hea).map_err(|e| Error::io(&hea_path, e))?;
    Ok(hea_path)
}
