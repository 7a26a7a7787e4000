//! Baseline removal, R-peak detection, beat segmentation and averaging.

pub mod filter;
pub mod rpeak;

use serde::{Deserialize, Serialize};

pub use filter::{highpass_baseline, FilterKind, Sos};
pub use rpeak::{detect_r_peaks, DetectorConfig};

use crate::error::{Error, Result};
use crate::lead::{Label, LeadId};
use crate::record::EcgRecord;
use crate::stats::resample_linear;
use crate::BEAT_LEN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub baseline_cutoff_hz: f64,
    pub filter_order: usize,
    pub detector: DetectorConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            baseline_cutoff_hz: 0.5,
            filter_order: 4,
            detector: DetectorConfig::default(),
        }
    }
}

/// The heartbeats of one lead, each resampled to [`BEAT_LEN`] samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatSet {
    pub lead: LeadId,
    beats: Vec<Vec<f64>>,
}

impl BeatSet {
    pub fn new(lead: LeadId, beats: Vec<Vec<f64>>) -> Result<Self> {
        if beats.is_empty() {
            return Err(Error::NotEnoughBeats("empty beat set".into()));
        }
        if let Some(b) = beats.iter().find(|b| b.len() != BEAT_LEN) {
            return Err(Error::CurveLength {
                expected: BEAT_LEN,
                found: b.len(),
            });
        }
        Ok(Self { lead, beats })
    }

    pub fn beats(&self) -> &[Vec<f64>] {
        &self.beats
    }

    pub fn len(&self) -> usize {
        self.beats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beats.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> BeatSet {
        BeatSet {
            lead: self.lead,
            beats: self
                .beats
                .iter()
                .map(|b| b.iter().map(|v| v * alpha).collect())
                .collect(),
        }
    }

    pub(crate) fn require_pairs(&self) -> Result<()> {
        if self.beats.len() < 2 {
            return Err(Error::NotEnoughBeats(format!(
                "lead {} has {} beat(s), need at least 2",
                self.lead,
                self.beats.len()
            )));
        }
        Ok(())
    }
}

/// The averaged heartbeat of one lead of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBeat {
    pub record_id: String,
    pub lead: LeadId,
    pub samples: Vec<f64>,
    pub n_beats_averaged: usize,
}

/// I + II + V4 + V5 + V6 - aVR, the lead sum in which R peaks point up.
pub fn composite_lead(record: &EcgRecord) -> Vec<f64> {
    const UP: [LeadId; 5] = [LeadId::I, LeadId::II, LeadId::V4, LeadId::V5, LeadId::V6];
    let avr = record.lead(LeadId::AVR);
    (0..record.duration_samples())
        .map(|t| UP.iter().map(|&l| record.lead(l)[t]).sum::<f64>() - avr[t])
        .collect()
}

/// Cuts one lead into midpoint-to-midpoint beats around each interior R peak.
///
/// The first and last peaks only bound their neighbours, so `n` peaks give
/// `n - 2` beats.
pub fn segment_beats(lead: LeadId, signal: &[f64], r_peaks: &[usize]) -> Result<BeatSet> {
    if r_peaks.len() < 3 {
        return Err(Error::NotEnoughBeats(format!(
            "{} R peak(s), need at least 3",
            r_peaks.len()
        )));
    }
    let beats = r_peaks
        .windows(3)
        .map(|w| {
            let start = (w[0] + w[1]) / 2;
            let end = ((w[1] + w[2]) / 2).min(signal.len());
            if end < start + 2 {
                return Err(Error::NotEnoughBeats(format!(
                    "beat around sample {} is shorter than 2 samples",
                    w[1]
                )));
            }
            Ok(resample_linear(&signal[start..end], BEAT_LEN))
        })
        .collect::<Result<Vec<_>>>()?;
    BeatSet::new(lead, beats)
}

/// Pointwise mean over the beats of one lead.
pub fn mean_beat(record_id: &str, beats: &BeatSet) -> Result<MeanBeat> {
    beats.require_pairs()?;
    let n = beats.len() as f64;
    let mut samples = vec![0.0; BEAT_LEN];
    for b in beats.beats() {
        for (acc, v) in samples.iter_mut().zip(b) {
            *acc += v;
        }
    }
    samples.iter_mut().for_each(|v| *v /= n);
    Ok(MeanBeat {
        record_id: record_id.to_string(),
        lead: beats.lead,
        samples,
        n_beats_averaged: beats.len(),
    })
}

/// Per-lead beats and R peaks of one preprocessed record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBeats {
    pub record_id: String,
    pub label: Label,
    pub r_peaks: Vec<usize>,
    /// One entry per lead in canonical order.
    pub beat_sets: Vec<BeatSet>,
}

impl RecordBeats {
    pub fn beat_set(&self, lead: LeadId) -> &BeatSet {
        &self.beat_sets[lead.index()]
    }

    pub fn mean_beats(&self) -> Result<Vec<MeanBeat>> {
        self.beat_sets
            .iter()
            .map(|b| mean_beat(&self.record_id, b))
            .collect()
    }
}

/// Filters every lead, finds R peaks on the composite lead and segments all
/// twelve leads on those peaks.
pub fn preprocess_record(record: &EcgRecord, cfg: &PreprocessConfig) -> Result<RecordBeats> {
    let fs = record.sample_rate_hz();
    let filtered = record.map_leads(|_, s| highpass_baseline(s, fs, cfg.baseline_cutoff_hz, cfg.filter_order))?;
    let composite = composite_lead(&filtered);
    let r_peaks = detect_r_peaks(&composite, fs, &cfg.detector)?;
    let beat_sets = filtered
        .leads()
        .map(|(lead, s)| segment_beats(lead, s, &r_peaks))
        .collect::<Result<Vec<_>>>()?;
    Ok(RecordBeats {
        record_id: record.record_id.clone(),
        label: record.label,
        r_peaks,
        beat_sets,
    })
}
