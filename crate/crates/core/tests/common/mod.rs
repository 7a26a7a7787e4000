#![allow(dead_code)]

use bsw_core::lead::LeadId;
use bsw_core::matching::AffinityMatrix;
use bsw_core::MeanBeat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const T: usize = 500;

/// (center, width, amplitude) Gaussians for P, Q, R, S, T.
pub fn gaussian_beat(waves: &[(f64, f64, f64)]) -> Vec<f64> {
    (0..T)
        .map(|t| {
            waves
                .iter()
                .map(|&(c, w, a)| a * (-0.5 * ((t as f64 - c) / w).powi(2)).exp())
                .sum()
        })
        .collect()
}

/// Reference beat with the given R amplitude in mV.
pub fn beat(r_amp: f64) -> Vec<f64> {
    gaussian_beat(&[
        (130.0, 18.0, 0.15),
        (240.0, 7.0, -0.1),
        (255.0, 10.0, r_amp),
        (272.0, 8.0, -0.25),
        (370.0, 30.0, 0.3),
    ])
}

/// Reference beat with randomized wave amplitudes and positions.
pub fn random_beat(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut j = |c: f64, w: f64, a: f64| {
        (
            c + rng.gen_range(-8.0..8.0),
            w * rng.gen_range(0.8..1.2),
            a * rng.gen_range(0.7..1.3),
        )
    };
    let waves = [
        j(130.0, 18.0, 0.15),
        j(240.0, 7.0, -0.1),
        j(255.0, 10.0, 1.0),
        j(272.0, 8.0, -0.25),
        j(370.0, 30.0, 0.3),
    ];
    gaussian_beat(&waves)
}

pub fn noisy(x: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = Normal::new(0.0, sigma).unwrap();
    x.iter().map(|v| v + n.sample(rng)).collect()
}

pub fn mean_beat(id: &str, lead: LeadId, samples: Vec<f64>) -> MeanBeat {
    MeanBeat {
        record_id: id.to_string(),
        lead,
        samples,
        n_beats_averaged: 8,
    }
}

/// `count` noisy copies of `template`, ids prefixed by `prefix`.
pub fn copies(prefix: &str, template: &[f64], count: usize, sigma: f64, seed: u64) -> Vec<MeanBeat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| mean_beat(&format!("{prefix}{i:02}"), LeadId::V5, noisy(template, sigma, &mut rng)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_affinity(n: usize, rng: &mut ChaCha8Rng) -> AffinityMatrix {
    let mut d = AffinityMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            d.set(i, j, rng.gen_range(0.01..10.0));
        }
    }
    d
}

/// Best total weight over all perfect matchings, by exhaustive recursion.
/// Pairs are accumulated in sorted order so totals compare exactly.
pub fn brute_force_best(n: usize, w: &dyn Fn(usize, usize) -> f64) -> (f64, Vec<(usize, usize)>) {
    fn rec(
        free: &mut Vec<usize>,
        acc: &mut Vec<(usize, usize)>,
        best: &mut (f64, Vec<(usize, usize)>),
        w: &dyn Fn(usize, usize) -> f64,
    ) {
        if free.is_empty() {
            let mut pairs = acc.clone();
            pairs.sort();
            let total: f64 = pairs.iter().map(|&(i, j)| w(i, j)).sum();
            if total > best.0 {
                *best = (total, pairs);
            }
            return;
        }
        let a = free.remove(0);
        for k in 0..free.len() {
            let b = free.remove(k);
            acc.push((a.min(b), a.max(b)));
            rec(free, acc, best, w);
            acc.pop();
            free.insert(k, b);
        }
        free.insert(0, a);
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut best, w);
    best
}
