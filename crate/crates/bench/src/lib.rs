//! Synthetic fixtures for the benchmarks.

use bsw_core::lead::{Label, LeadId};
use bsw_core::matching::AffinityMatrix;
use bsw_core::synth::{template, wave};
use bsw_core::MeanBeat;

/// A 500-sample beat from the synthetic lead templates, with the R wave
/// scaled by `r_scale` and every wave shifted by `shift` samples.
pub fn beat(lead: LeadId, label: Label, r_scale: f64, shift: f64) -> Vec<f64> {
    let mut amps = template(label, lead, false);
    amps[2] *= r_scale;
    (0..500)
        .map(|t| wave(&amps, (t as f64 - 250.0 - shift) / 500.0))
        .collect()
}

/// `n` slightly different V5 candidates.
pub fn candidates(n: usize) -> Vec<MeanBeat> {
    (0..n)
        .map(|i| MeanBeat {
            record_id: format!("b{i:03}"),
            lead: LeadId::V5,
            samples: beat(LeadId::V5, Label::Normal, 1.0 + 0.01 * (i % 7) as f64, (i % 5) as f64 - 2.0),
            n_beats_averaged: 8,
        })
        .collect()
}

/// Deterministic pseudo-random symmetric distances.
pub fn distances(n: usize) -> AffinityMatrix {
    AffinityMatrix::from_fn(n, |i, j| {
        let h = (i.min(j) * 7919 + i.max(j) * 104_729) % 1000;
        0.01 + h as f64 / 100.0
    })
}
