//! Seeded synthetic 12-lead ECG records built from Gaussian P-Q-R-S-T
//! waves. Used by tests, benchmarks and demos; not a physiological model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::lead::{Label, LeadId};
use crate::record::EcgRecord;

/// Wave centers (s, relative to R) and widths (s) for P, Q, R, S, T.
const CENTERS: [f64; 5] = [-0.16, -0.025, 0.0, 0.03, 0.28];
const WIDTHS: [f64; 5] = [0.025, 0.008, 0.01, 0.01, 0.05];

/// Normal-class wave amplitudes in mV per lead, canonical order.
const NORMAL: [[f64; 5]; 12] = [
    [0.08, -0.05, 0.7, -0.1, 0.2],
    [0.12, -0.05, 1.0, -0.15, 0.3],
    [0.05, -0.03, 0.4, -0.1, 0.1],
    [-0.1, 0.05, -0.8, 0.1, -0.25],
    [0.03, -0.05, 0.5, -0.1, 0.1],
    [0.08, -0.04, 0.7, -0.1, 0.2],
    [0.05, 0.0, 0.3, -1.0, 0.1],
    [0.06, 0.0, 0.6, -1.4, 0.4],
    [0.06, -0.05, 0.9, -0.8, 0.4],
    [0.07, -0.08, 1.3, -0.4, 0.35],
    [0.07, -0.1, 1.4, -0.2, 0.3],
    [0.06, -0.08, 1.0, -0.1, 0.25],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub heart_rate_bpm: (f64, f64),
    /// Relative standard deviation of RR intervals.
    pub rr_jitter: f64,
    /// Per-record, per-lead amplitude spread (uniform, relative).
    pub amplitude_spread: f64,
    pub noise_mv: f64,
    pub wander_mv: f64,
    /// Probability that an LVH record carries inverted lateral T waves.
    pub strain_probability: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 500.0,
            duration_s: 10.0,
            heart_rate_bpm: (66.0, 76.0),
            rr_jitter: 0.005,
            amplitude_spread: 0.15,
            noise_mv: 0.01,
            wander_mv: 0.05,
            strain_probability: 0.3,
        }
    }
}

/// Wave amplitudes for one lead of one class, before per-record variation.
pub fn template(label: Label, lead: LeadId, strain: bool) -> [f64; 5] {
    let mut a = NORMAL[lead.index()];
    if label == Label::Lvh {
        match lead {
            LeadId::V1 => a[3] *= 2.0,
            LeadId::V2 => a[3] *= 1.8,
            LeadId::V5 => a[2] *= 1.8,
            LeadId::V6 => a[2] *= 1.9,
            LeadId::AVL => a[2] *= 2.6,
            LeadId::I => a[2] *= 1.5,
            _ => {}
        }
        if strain && matches!(lead, LeadId::I | LeadId::AVL | LeadId::V5 | LeadId::V6) {
            a[4] *= -0.8;
        }
    }
    a
}

/// One beat of `amps` evaluated at `dt` seconds from the R peak.
pub fn wave(amps: &[f64; 5], dt: f64) -> f64 {
    (0..5)
        .map(|k| amps[k] * (-0.5 * ((dt - CENTERS[k]) / WIDTHS[k]).powi(2)).exp())
        .sum()
}

pub fn synthetic_record(id: &str, label: Label, seed: u64, cfg: &SynthConfig) -> Result<EcgRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = cfg.sample_rate_hz;
    let n = (cfg.duration_s * fs).round() as usize;
    let strain = label == Label::Lvh && rng.gen_bool(cfg.strain_probability);
    let amps: Vec<[f64; 5]> = LeadId::ALL
        .iter()
        .map(|&l| {
            let f = 1.0 + rng.gen_range(-cfg.amplitude_spread..=cfg.amplitude_spread);
            template(label, l, strain).map(|a| a * f)
        })
        .collect();

    let rr_mean = 60.0 / rng.gen_range(cfg.heart_rate_bpm.0..=cfg.heart_rate_bpm.1);
    let rr = Normal::new(rr_mean, rr_mean * cfg.rr_jitter).expect("finite RR parameters");
    let mut peaks = vec![rng.gen_range(0.2..0.2 + rr_mean)];
    while *peaks.last().unwrap() < cfg.duration_s + 1.0 {
        let next = peaks.last().unwrap() + rr.sample(&mut rng).max(0.3);
        peaks.push(next);
    }

    let noise = Normal::new(0.0, cfg.noise_mv.max(0.0)).expect("finite noise level");
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut leads = vec![vec![0.0; n]; 12];
    for t in 0..n {
        let time = t as f64 / fs;
        let wander = cfg.wander_mv * (std::f64::consts::TAU * 0.25 * time + phase).sin();
        let near: Vec<f64> = peaks.iter().map(|p| time - p).filter(|dt| dt.abs() < 0.7).collect();
        for (k, a) in amps.iter().enumerate() {
            let v: f64 = near.iter().map(|&dt| wave(a, dt)).sum();
            leads[k][t] = v + wander + noise.sample(&mut rng);
        }
    }
    EcgRecord::new(id, label, fs, leads)
}

/// `n_normal` Normal then `n_lvh` LVH records, each with its own derived seed.
pub fn synthetic_cohort(n_normal: usize, n_lvh: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<EcgRecord>> {
    let plan = (0..n_normal)
        .map(|i| (format!("syn_n{i:04}"), Label::Normal))
        .chain((0..n_lvh).map(|i| (format!("syn_l{i:04}"), Label::Lvh)));
    plan.enumerate()
        .map(|(i, (id, label))| synthetic_record(&id, label, seed.wrapping_mul(1_000_003).wrapping_add(i as u64), cfg))
        .collect()
}
