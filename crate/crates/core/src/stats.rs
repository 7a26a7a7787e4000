//! Small numeric helpers shared across modules.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Standard deviation about the weighted mean; weights need not be normalized.
pub fn weighted_std(x: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return std(x);
    }
    let m = x.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = x
        .iter()
        .zip(w)
        .map(|(v, w)| w * (v - m) * (v - m))
        .sum::<f64>()
        / total;
    var.max(0.0).sqrt()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// `max - min` of the values, 0 for an empty slice.
pub fn range(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Linear interpolation of `x` at fractional index `pos`, clamped to the ends.
pub fn interp_clamped(x: &[f64], pos: f64) -> f64 {
    let last = x.len() - 1;
    if pos <= 0.0 {
        return x[0];
    }
    if pos >= last as f64 {
        return x[last];
    }
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if frac == 0.0 {
        x[i]
    } else {
        x[i] + frac * (x[i + 1] - x[i])
    }
}

/// Slope of the interpolant used by [`interp_clamped`] at `pos`.
///
/// Uses the segment to the right at knots and 0 outside the support.
pub fn interp_slope(x: &[f64], pos: f64) -> f64 {
    let last = x.len() - 1;
    if pos < 0.0 || pos >= last as f64 {
        return 0.0;
    }
    let i = pos.floor() as usize;
    x[i + 1] - x[i]
}

/// Centered moving average with a window of `width` samples, shrinking at the
/// edges.
pub fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 || width <= 1 {
        return x.to_vec();
    }
    let half_lo = (width - 1) / 2;
    let half_hi = width - 1 - half_lo;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_lo);
            let hi = (i + half_hi + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Resamples `x` onto `n` uniformly spaced points spanning the same support.
pub fn resample_linear(x: &[f64], n: usize) -> Vec<f64> {
    if x.len() == 1 || n == 1 {
        return vec![x[0]; n];
    }
    let scale = (x.len() - 1) as f64 / (n - 1) as f64;
    (0..n).map(|j| interp_clamped(x, j as f64 * scale)).collect()
}
