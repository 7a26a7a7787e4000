//! Per-record JSON bundle written by preprocessing: the twelve mean beats
//! plus each lead's heartbeat-variability ratio.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lead::{Label, LeadId};
use crate::preprocess::{MeanBeat, RecordBeats};
use crate::screening::{vh, VariabilityReport};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeatBundle {
    pub format_version: u32,
    pub record_id: String,
    pub label: Label,
    pub sample_rate_hz: f64,
    pub r_peaks: Vec<usize>,
    /// Beats averaged into each mean beat.
    pub n_beats: usize,
    pub mean_beats: BTreeMap<LeadId, Vec<f64>>,
    /// `null` where the ratio is undefined (flat lead).
    pub vh: BTreeMap<LeadId, Option<f64>>,
}

impl BeatBundle {
    pub fn from_record_beats(beats: &RecordBeats, sample_rate_hz: f64) -> Result<Self> {
        let means = beats.mean_beats()?;
        Ok(Self {
            format_version: BUNDLE_VERSION,
            record_id: beats.record_id.clone(),
            label: beats.label,
            sample_rate_hz,
            r_peaks: beats.r_peaks.clone(),
            n_beats: means.first().map_or(0, |m| m.n_beats_averaged),
            mean_beats: means.into_iter().map(|m| (m.lead, m.samples)).collect(),
            vh: beats.beat_sets.iter().map(|b| (b.lead, vh(b).ok())).collect(),
        })
    }

    pub fn mean_beats(&self) -> Vec<MeanBeat> {
        self.mean_beats
            .iter()
            .map(|(&lead, s)| MeanBeat {
                record_id: self.record_id.clone(),
                lead,
                samples: s.clone(),
                n_beats_averaged: self.n_beats,
            })
            .collect()
    }

    pub fn variability(&self, threshold: f64) -> VariabilityReport {
        let scores = LeadId::ALL
            .iter()
            .map(|&l| {
                let s = self.vh.get(&l).copied().flatten().ok_or(Error::DegenerateFlatBeats);
                (l, s)
            })
            .collect();
        VariabilityReport::from_lead_scores(&self.record_id, scores, threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::LibraryParse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Self = serde_json::from_str(text).map_err(|e| Error::LibraryParse(e.to_string()))?;
        if b.format_version != BUNDLE_VERSION {
            return Err(Error::VersionMismatch {
                found: b.format_version,
                expected: BUNDLE_VERSION,
            });
        }
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::BeatSet;

    #[test]
    fn round_trip_and_flat_lead() {
        let beat_sets = LeadId::ALL
            .iter()
            .map(|&lead| {
                let beats = (0..3)
                    .map(|k| {
                        (0..500)
                            .map(|t| if lead == LeadId::AVL { 0.0 } else { (t as f64 * 0.02 + k as f64).sin() })
                            .collect()
                    })
                    .collect();
                BeatSet::new(lead, beats).unwrap()
            })
            .collect();
        let rb = RecordBeats {
            record_id: "r".into(),
            label: Label::Normal,
            r_peaks: vec![100, 600, 1100, 1600, 2100],
            beat_sets,
        };
        let b = BeatBundle::from_record_beats(&rb, 500.0).unwrap();
        assert_eq!(b.vh[&LeadId::AVL], None);
        assert!(b.vh[&LeadId::V1].unwrap() > 0.0);
        let back = BeatBundle::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(back, b);
        let rep = back.variability(0.3);
        assert!(!rep.eligible);
        assert_eq!(back.mean_beats().len(), 12);
    }
}
