//! Butterworth IIR design as second-order sections and zero-phase filtering.
//!
//! Sections are designed from the analog prototype with a prewarped bilinear
//! transform and run in transposed direct form II.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

/// One second-order section, normalized so that `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// State that makes a unit step input produce its steady-state output.
    fn step_state(&self) -> [f64; 2] {
        let y = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * y;
        let z1 = self.b[1] - self.a[1] * y + z2;
        [z1, z2]
    }

    /// Complex response at normalized angular frequency `w` (rad/sample).
    fn response(&self, w: f64) -> (f64, f64) {
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -c[1] * w.sin() - c[2] * (2.0 * w).sin();
            (re, im)
        };
        let (nr, ni) = eval(&self.b);
        let (dr, di) = eval(&self.a);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
    pub order: usize,
}

impl Sos {
    /// Designs a digital Butterworth filter of the given order.
    pub fn butterworth(kind: FilterKind, order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Sos> {
        let nyquist_hz = sample_rate_hz / 2.0;
        if !(cutoff_hz > 0.0 && cutoff_hz < nyquist_hz) {
            return Err(Error::CutoffOutOfRange {
                cutoff_hz,
                nyquist_hz,
            });
        }
        if order == 0 {
            return Err(Error::Config("filter order must be at least 1".into()));
        }
        // Prewarped analog cutoff for the bilinear map s = (1 - z^-1) / (1 + z^-1).
        let wc = (PI * cutoff_hz / sample_rate_hz).tan();
        let wc2 = wc * wc;
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        for k in 0..order / 2 {
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            let damping = 2.0 * theta.sin();
            let a0 = 1.0 + damping * wc + wc2;
            let a = [1.0, (2.0 * wc2 - 2.0) / a0, (1.0 - damping * wc + wc2) / a0];
            let b = match kind {
                FilterKind::Highpass => [1.0 / a0, -2.0 / a0, 1.0 / a0],
                FilterKind::Lowpass => [wc2 / a0, 2.0 * wc2 / a0, wc2 / a0],
            };
            sections.push(Biquad { b, a });
        }
        if order % 2 == 1 {
            let a0 = 1.0 + wc;
            let a = [1.0, (wc - 1.0) / a0, 0.0];
            let b = match kind {
                FilterKind::Highpass => [1.0 / a0, -1.0 / a0, 0.0],
                FilterKind::Lowpass => [wc / a0, wc / a0, 0.0],
            };
            sections.push(Biquad { b, a });
        }
        Ok(Sos { sections, order })
    }

    /// Magnitude of the single-pass frequency response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(w);
                (re * re + im * im).sqrt()
            })
            .product()
    }

    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let z = s.step_state();
                let out = [z[0] * scale, z[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    /// Causal filtering starting from the given per-section states.
    pub fn filter_with_state(&self, x: &[f64], mut state: Vec<[f64; 2]>) -> Vec<f64> {
        let mut y = x.to_vec();
        for (s, z) in self.sections.iter().zip(state.iter_mut()) {
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z[0];
                z[0] = s.b[1] * input - s.a[1] * out + z[1];
                z[1] = s.b[2] * input - s.a[2] * out;
                *v = out;
            }
        }
        y
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        self.filter_with_state(x, vec![[0.0; 2]; self.sections.len()])
    }

    fn pad_len(&self) -> usize {
        3 * (2 * self.sections.len() + 1)
    }

    /// Forward-backward filtering with odd-extension padding and step-response
    /// initial conditions. The effective magnitude response is `|H|^2` with
    /// zero phase.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let min = 3 * self.order;
        if x.len() <= min {
            return Err(Error::SignalTooShort { len: x.len(), min });
        }
        let n = x.len();
        let pad = self.pad_len().min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let zi = self.step_states();
        let scaled = |v: f64| zi.iter().map(|z| [z[0] * v, z[1] * v]).collect::<Vec<_>>();

        let mut fwd = self.filter_with_state(&ext, scaled(ext[0]));
        fwd.reverse();
        let mut back = self.filter_with_state(&fwd, scaled(fwd[0]));
        back.reverse();
        Ok(back[pad..pad + n].to_vec())
    }
}

/// Zero-phase Butterworth high-pass used for baseline wander removal.
pub fn highpass_baseline(signal: &[f64], sample_rate_hz: f64, cutoff_hz: f64, order: usize) -> Result<Vec<f64>> {
    Sos::butterworth(FilterKind::Highpass, order, cutoff_hz, sample_rate_hz)?.filtfilt(signal)
}
