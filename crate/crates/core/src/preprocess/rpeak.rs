//! Energy-based R-peak detector in the Pan-Tompkins family.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::filter::{FilterKind, Sos};
use crate::error::{Error, Result};
use crate::stats::moving_average;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub band_order: usize,
    pub integration_ms: f64,
    pub refractory_s: f64,
    pub threshold_fraction: f64,
    pub threshold_history: usize,
    pub refine_ms: f64,
    pub min_peaks: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            band_low_hz: 5.0,
            band_high_hz: 15.0,
            band_order: 2,
            integration_ms: 150.0,
            refractory_s: 0.3,
            threshold_fraction: 0.5,
            threshold_history: 8,
            refine_ms: 50.0,
            min_peaks: 3,
        }
    }
}

/// Squared, band-limited and window-integrated energy of the composite lead.
pub fn integrated_energy(composite: &[f64], sample_rate_hz: f64, cfg: &DetectorConfig) -> Result<Vec<f64>> {
    let hp = Sos::butterworth(FilterKind::Highpass, cfg.band_order, cfg.band_low_hz, sample_rate_hz)?;
    let lp = Sos::butterworth(FilterKind::Lowpass, cfg.band_order, cfg.band_high_hz, sample_rate_hz)?;
    let band = lp.filtfilt(&hp.filtfilt(composite)?)?;
    let squared: Vec<f64> = band.iter().map(|v| v * v).collect();
    let width = ((cfg.integration_ms / 1000.0) * sample_rate_hz).round().max(1.0) as usize;
    Ok(moving_average(&squared, width))
}

/// Detects R peaks on the composite lead; indices are strictly increasing
/// and at least one refractory period apart.
pub fn detect_r_peaks(composite: &[f64], sample_rate_hz: f64, cfg: &DetectorConfig) -> Result<Vec<usize>> {
    let n = composite.len();
    if (n as f64) < 2.0 * sample_rate_hz {
        return Err(Error::NotEnoughBeats(format!(
            "{n} samples is shorter than 2 s"
        )));
    }
    let energy = integrated_energy(composite, sample_rate_hz, cfg)?;
    // The centred integration window is truncated within `guard` samples of
    // either end, which produces spurious maxima there.
    let guard = ((cfg.integration_ms / 1000.0) * sample_rate_hz).round() as usize;
    let refractory = (cfg.refractory_s * sample_rate_hz).ceil() as usize;

    // Learning phase: seed the running peak average from the first 2 s.
    let learn = (2.0 * sample_rate_hz) as usize;
    let seed = energy[..learn.min(n)].iter().cloned().fold(0.0, f64::max);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(cfg.threshold_history);
    history.push_back(seed);

    let mut detections: Vec<usize> = Vec::new();
    for i in guard.max(1)..n.saturating_sub(guard.max(1)) {
        let e = energy[i];
        if !(e > 0.0 && e > energy[i - 1] && e >= energy[i + 1]) {
            continue;
        }
        let mean = history.iter().sum::<f64>() / history.len() as f64;
        if e < cfg.threshold_fraction * mean {
            continue;
        }
        if let Some(&last) = detections.last() {
            if i - last < refractory {
                if e > energy[last] {
                    *detections.last_mut().unwrap() = i;
                    *history.back_mut().unwrap() = e;
                }
                continue;
            }
        }
        detections.push(i);
        if history.len() == cfg.threshold_history {
            history.pop_front();
        }
        history.push_back(e);
    }

    let half = ((cfg.refine_ms / 1000.0) * sample_rate_hz).round() as usize;
    let mut peaks: Vec<usize> = Vec::with_capacity(detections.len());
    for d in detections {
        let lo = d.saturating_sub(half);
        let hi = (d + half + 1).min(n);
        let mut best = lo;
        for j in lo..hi {
            if composite[j] > composite[best] {
                best = j;
            }
        }
        match peaks.last_mut() {
            Some(last) if best < *last + refractory => {
                if composite[best] > composite[*last] {
                    *last = best;
                }
            }
            _ => peaks.push(best),
        }
    }

    if peaks.len() < cfg.min_peaks {
        return Err(Error::NotEnoughBeats(format!(
            "detected {} R peaks, need {}",
            peaks.len(),
            cfg.min_peaks
        )));
    }
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 500.0;

    fn spike_train(len: usize, positions: &[(usize, f64)]) -> Vec<f64> {
        let mut x = vec![0.0; len];
        for &(p, amp) in positions {
            for k in -6i64..=6 {
                let j = p as i64 + k;
                if (0..len as i64).contains(&j) {
                    x[j as usize] += amp * (-(k * k) as f64 / 8.0).exp();
                }
            }
        }
        x
    }

    #[test]
    fn finds_each_spike_of_a_regular_train() {
        let truth: Vec<usize> = (0..10).map(|k| 250 + 500 * k).collect();
        let x = spike_train(5000, &truth.iter().map(|&p| (p, 1.0)).collect::<Vec<_>>());
        let peaks = detect_r_peaks(&x, FS, &DetectorConfig::default()).unwrap();
        assert_eq!(peaks.len(), 10);
        for (p, t) in peaks.iter().zip(&truth) {
            assert!(p.abs_diff(*t) <= 1, "{p} vs {t}");
        }
    }

    #[test]
    fn flat_signal_has_no_beats() {
        let x = vec![0.0; 5000];
        assert!(matches!(
            detect_r_peaks(&x, FS, &DetectorConfig::default()),
            Err(Error::NotEnoughBeats(_))
        ));
    }

    #[test]
    fn spike_inside_refractory_window_is_suppressed() {
        let mut pos: Vec<(usize, f64)> = (0..8).map(|k| (250 + 600 * k, 1.0)).collect();
        // 0.1 s after the fourth spike.
        pos.push((250 + 600 * 3 + 50, 0.6));
        let x = spike_train(5000, &pos);
        let peaks = detect_r_peaks(&x, FS, &DetectorConfig::default()).unwrap();
        assert_eq!(peaks.len(), 8);
        assert!(peaks.contains(&(250 + 600 * 3)));
        assert!(!peaks.iter().any(|&p| p.abs_diff(250 + 600 * 3 + 50) <= 2));
    }

    #[test]
    fn spacing_respects_refractory_period() {
        let pos: Vec<(usize, f64)> = (0..25).map(|k| (100 + 190 * k, 1.0 + 0.1 * (k % 3) as f64)).collect();
        let x = spike_train(5000, &pos);
        let peaks = detect_r_peaks(&x, FS, &DetectorConfig::default()).unwrap();
        for w in peaks.windows(2) {
            assert!(w[1] - w[0] >= 150);
        }
    }
}
