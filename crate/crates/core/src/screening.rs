//! Heartbeat-variability screening of prototype donors.
//!
//! `v(H)` averages the cross-beat sample standard deviation over time,
//! `a(H)` averages the within-beat sample standard deviation over beats, and
//! `v_h = v / a` is the dimensionless score thresholded per lead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lead::LeadId;
use crate::preprocess::BeatSet;
use crate::stats::sample_std;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreeningConfig {
    pub vh_threshold: f64,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        Self { vh_threshold: 0.3 }
    }
}

const FLAT_ACTIVITY_MV: f64 = 1e-12;

/// Mean over time of the cross-beat standard deviation.
pub fn variability(beats: &BeatSet) -> Result<f64> {
    beats.require_pairs()?;
    let rows = beats.beats();
    let t_len = rows[0].len();
    let n = rows.len() as f64;
    let total: f64 = (0..t_len)
        .map(|t| {
            let mean = rows.iter().map(|b| b[t]).sum::<f64>() / n;
            let ss: f64 = rows.iter().map(|b| (b[t] - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .sum();
    Ok(total / t_len as f64)
}

/// Mean over beats of the within-beat standard deviation.
pub fn activity(beats: &BeatSet) -> Result<f64> {
    beats.require_pairs()?;
    let rows = beats.beats();
    Ok(rows.iter().map(|b| sample_std(b)).sum::<f64>() / rows.len() as f64)
}

pub fn vh(beats: &BeatSet) -> Result<f64> {
    let a = activity(beats)?;
    // Rounding leaves ~1e-17 of "activity" on constant beats.
    if a <= FLAT_ACTIVITY_MV {
        return Err(Error::DegenerateFlatBeats);
    }
    Ok(variability(beats)? / a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityReport {
    pub record_id: String,
    /// `None` where the lead's beats were flat or too few.
    pub per_lead_vh: Vec<(LeadId, Option<f64>)>,
    pub max_vh: f64,
    pub eligible: bool,
    pub reason: Option<String>,
}

impl VariabilityReport {
    /// Builds the report from per-lead `v_h` outcomes. Any failed lead makes
    /// the record ineligible and its `max_vh` infinite.
    pub fn from_lead_scores(record_id: &str, scores: Vec<(LeadId, Result<f64>)>, threshold: f64) -> Self {
        let mut reason = None;
        let mut max_vh: f64 = 0.0;
        let per_lead_vh = scores
            .into_iter()
            .map(|(lead, s)| match s {
                Ok(v) => {
                    max_vh = max_vh.max(v);
                    (lead, Some(v))
                }
                Err(e) => {
                    max_vh = f64::INFINITY;
                    reason.get_or_insert_with(|| format!("lead {lead}: {e}"));
                    (lead, None)
                }
            })
            .collect();
        let eligible = reason.is_none() && max_vh < threshold;
        if reason.is_none() && !eligible {
            reason = Some(format!("max v_h {max_vh:.4} >= {threshold}"));
        }
        Self {
            record_id: record_id.to_string(),
            per_lead_vh,
            max_vh,
            eligible,
            reason,
        }
    }
}

/// Scores one record from its per-lead beat sets.
pub fn screen_record(record_id: &str, beat_sets: &[BeatSet], threshold: f64) -> VariabilityReport {
    let scores = beat_sets.iter().map(|b| (b.lead, vh(b))).collect();
    VariabilityReport::from_lead_scores(record_id, scores, threshold)
}

/// Screens many records, preserving input order.
pub fn screen(records: &[(String, Vec<BeatSet>)], threshold: f64) -> Vec<VariabilityReport> {
    use rayon::prelude::*;
    records
        .par_iter()
        .map(|(id, sets)| screen_record(id, sets, threshold))
        .collect()
}
