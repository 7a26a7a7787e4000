//! Bilateral signal warping: fit an amplitude ratio `r(t)` and a time shift
//! `s(t)` (in samples) such that `r(t) f(t) ≈ g(t + s(t))`.
//!
//! The discretized objective is
//!
//! ```text
//! L = Σ (r_t f_t - g(t + s_t))²
//!   + w_r Σ (r_{t+1} - r_t)² + w_s Σ (s_{t+1} - s_t)²
//!   + w_o Σ [(s_min - s_t)_+² + (s_t - s_max)_+²]
//! ```
//!
//! with `g` read by clamped linear interpolation. It is minimized by a
//! damped descent: each step solves `(H + I/η) d = -∇L`, where `H` is the
//! Gauss-Newton curvature of the misfit plus the exact Hessians of the
//! penalties. `η` acts as the step size: it is halved when a step fails to
//! lower the loss and grown when one succeeds, so tiny `η` degenerates to
//! plain gradient descent with step `η`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{interp_clamped, interp_slope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpConfig {
    /// Smoothness weight on `r'`.
    pub w_r: f64,
    /// Smoothness weight on `s'`.
    pub w_s: f64,
    /// Weight of the out-of-bounds penalty on `s`.
    pub w_o: f64,
    /// Lower shift bound, in samples.
    pub s_min: f64,
    /// Upper shift bound, in samples.
    pub s_max: f64,
    pub max_iters: usize,
    /// Initial step size `η`.
    pub step_size: f64,
    pub step_growth: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub rel_tol: f64,
    /// Floor applied to `r` after every step.
    pub r_floor: f64,
    /// Multipliers of `w_s` for the stiff warm-up stages, largest first.
    pub s_continuation: Vec<f64>,
}

impl Default for WarpConfig {
    fn default() -> Self {
        Self {
            w_r: 20.0,
            w_s: 1e-4,
            w_o: 1e10,
            s_min: -100.0,
            s_max: 100.0,
            max_iters: 2000,
            step_size: 1e-3,
            step_growth: 1.2,
            max_step: 1e9,
            min_step: 1e-15,
            rel_tol: 1e-6,
            r_floor: 1e-3,
            s_continuation: vec![1e5, 1e4, 1e3, 1e2, 1e1],
        }
    }
}

impl WarpConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.w_r > 0.0
            && self.w_s > 0.0
            && self.w_o > 0.0
            && self.s_min < 0.0
            && self.s_max > 0.0
            && self.max_iters >= 1
            && self.step_size > 0.0
            && self.step_growth >= 1.0
            && self.max_step >= self.step_size
            && self.min_step > 0.0
            && self.rel_tol >= 0.0
            && self.r_floor > 0.0
            && self.s_continuation.iter().all(|m| m.is_finite() && *m > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid warp configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpResult {
    /// Amplitude ratio, strictly positive.
    pub r: Vec<f64>,
    /// Time shift in samples.
    pub s: Vec<f64>,
    pub loss: f64,
    pub converged: bool,
    /// Accepted descent steps.
    pub iters: usize,
}

/// The four unweighted parts of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub misfit: f64,
    pub r_smooth: f64,
    pub s_smooth: f64,
    pub bound_penalty: f64,
}

impl LossTerms {
    pub fn total(&self, cfg: &WarpConfig) -> f64 {
        self.misfit + cfg.w_r * self.r_smooth + cfg.w_s * self.s_smooth + cfg.w_o * self.bound_penalty
    }
}

fn check_lengths(f: &[f64], g: &[f64], r: &[f64], s: &[f64]) -> Result<()> {
    let n = f.len();
    for len in [g.len(), r.len(), s.len()] {
        if len != n {
            return Err(Error::LengthMismatch(n, len));
        }
    }
    if n < 2 {
        return Err(Error::LengthMismatch(n, 2));
    }
    Ok(())
}

fn sq_diff_sum(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

fn excess(s: f64, cfg: &WarpConfig) -> f64 {
    if s < cfg.s_min {
        s - cfg.s_min
    } else if s > cfg.s_max {
        s - cfg.s_max
    } else {
        0.0
    }
}

fn terms_unchecked(f: &[f64], g: &[f64], r: &[f64], s: &[f64], cfg: &WarpConfig) -> LossTerms {
    let misfit = (0..f.len())
        .map(|t| (r[t] * f[t] - interp_clamped(g, t as f64 + s[t])).powi(2))
        .sum();
    LossTerms {
        misfit,
        r_smooth: sq_diff_sum(r),
        s_smooth: sq_diff_sum(s),
        bound_penalty: s.iter().map(|&v| excess(v, cfg).powi(2)).sum(),
    }
}

/// Evaluates the four objective terms at `(r, s)`.
pub fn loss_terms(f: &[f64], g: &[f64], r: &[f64], s: &[f64], cfg: &WarpConfig) -> Result<LossTerms> {
    check_lengths(f, g, r, s)?;
    Ok(terms_unchecked(f, g, r, s, cfg))
}

pub fn loss(f: &[f64], g: &[f64], r: &[f64], s: &[f64], cfg: &WarpConfig) -> Result<f64> {
    Ok(loss_terms(f, g, r, s, cfg)?.total(cfg))
}

/// Adds the gradient of `w Σ (x_{t+1} - x_t)²` to `out`.
fn add_smooth_grad(x: &[f64], w: f64, out: &mut [f64]) {
    for t in 0..x.len() - 1 {
        let d = 2.0 * w * (x[t + 1] - x[t]);
        out[t] -= d;
        out[t + 1] += d;
    }
}

/// Analytic gradient `(∂L/∂r, ∂L/∂s)` of the discretized objective.
///
/// At knots of the interpolant the slope of the segment to the right is used.
pub fn gradient(f: &[f64], g: &[f64], r: &[f64], s: &[f64], cfg: &WarpConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    check_lengths(f, g, r, s)?;
    Ok(gradient_unchecked(f, g, r, s, cfg))
}

fn gradient_unchecked(f: &[f64], g: &[f64], r: &[f64], s: &[f64], cfg: &WarpConfig) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut gr = vec![0.0; n];
    let mut gs = vec![0.0; n];
    for t in 0..n {
        let pos = t as f64 + s[t];
        let e = r[t] * f[t] - interp_clamped(g, pos);
        gr[t] = 2.0 * e * f[t];
        gs[t] = -2.0 * e * interp_slope(g, pos) + 2.0 * cfg.w_o * excess(s[t], cfg);
    }
    add_smooth_grad(r, cfg.w_r, &mut gr);
    add_smooth_grad(s, cfg.w_s, &mut gs);
    (gr, gs)
}

type Mat2 = [[f64; 2]; 2];

fn inv2(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn mul2v(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Solves `(H + damping I) d = -grad` where `H` is block tridiagonal with 2×2
/// blocks `(r_t, s_t)` and diagonal off-blocks from the smoothness terms.
fn descent_direction(
    f: &[f64],
    g: &[f64],
    s: &[f64],
    grad: (&[f64], &[f64]),
    damping: f64,
    cfg: &WarpConfig,
) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let off = [-2.0 * cfg.w_r, -2.0 * cfg.w_s];
    let mut diag: Vec<Mat2> = Vec::with_capacity(n);
    let mut rhs: Vec<[f64; 2]> = Vec::with_capacity(n);
    for t in 0..n {
        let slope = interp_slope(g, t as f64 + s[t]);
        let links = if t == 0 || t == n - 1 { 1.0 } else { 2.0 };
        let outside = if excess(s[t], cfg) != 0.0 { 2.0 * cfg.w_o } else { 0.0 };
        diag.push([
            [
                2.0 * f[t] * f[t] + 2.0 * cfg.w_r * links + damping,
                -2.0 * f[t] * slope,
            ],
            [
                -2.0 * f[t] * slope,
                2.0 * slope * slope + 2.0 * cfg.w_s * links + outside + damping,
            ],
        ]);
        rhs.push([-grad.0[t], -grad.1[t]]);
    }
    // Forward elimination.
    let mut inv: Vec<Mat2> = Vec::with_capacity(n);
    inv.push(inv2(&diag[0]));
    for t in 1..n {
        let prev = inv[t - 1];
        // M = O * prev_inv with O = diag(off); D_t -= M * O.
        let m = [
            [off[0] * prev[0][0], off[0] * prev[0][1]],
            [off[1] * prev[1][0], off[1] * prev[1][1]],
        ];
        let mut d = diag[t];
        d[0][0] -= m[0][0] * off[0];
        d[0][1] -= m[0][1] * off[1];
        d[1][0] -= m[1][0] * off[0];
        d[1][1] -= m[1][1] * off[1];
        let y = mul2v(&m, rhs[t - 1]);
        rhs[t][0] -= y[0];
        rhs[t][1] -= y[1];
        inv.push(inv2(&d));
    }
    // Back substitution.
    let mut dr = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut next = mul2v(&inv[n - 1], rhs[n - 1]);
    dr[n - 1] = next[0];
    ds[n - 1] = next[1];
    for t in (0..n - 1).rev() {
        let v = [rhs[t][0] - off[0] * next[0], rhs[t][1] - off[1] * next[1]];
        next = mul2v(&inv[t], v);
        dr[t] = next[0];
        ds[t] = next[1];
    }
    (dr, ds)
}

/// Outcome of one descent run on a fixed objective.
struct Descent {
    loss: f64,
    iters: usize,
    converged: bool,
}

fn descend(
    f: &[f64],
    g: &[f64],
    r: &mut Vec<f64>,
    s: &mut Vec<f64>,
    cfg: &WarpConfig,
    step: &mut f64,
    budget: usize,
) -> Result<Descent> {
    let mut current = terms_unchecked(f, g, r, s, cfg).total(cfg);
    let mut iters = 0;
    while iters < budget {
        let (gr, gs) = gradient_unchecked(f, g, r, s, cfg);
        if current == 0.0 || gr.iter().chain(&gs).all(|&v| v == 0.0) {
            return Ok(Descent { loss: current, iters, converged: true });
        }
        let accepted = loop {
            let (dr, ds) = descent_direction(f, g, s, (&gr, &gs), 1.0 / *step, cfg);
            let r_new: Vec<f64> = r.iter().zip(&dr).map(|(a, d)| (a + d).max(cfg.r_floor)).collect();
            let s_new: Vec<f64> = s.iter().zip(&ds).map(|(a, d)| a + d).collect();
            let trial = terms_unchecked(f, g, &r_new, &s_new, cfg).total(cfg);
            if trial.is_finite() && trial < current {
                *step = (*step * cfg.step_growth).min(cfg.max_step);
                break Some((r_new, s_new, trial));
            }
            *step *= 0.5;
            if *step < cfg.min_step {
                if !trial.is_finite() {
                    return Err(Error::StepUnderflow);
                }
                break None;
            }
        };
        // No step lowers the loss: numerically stationary.
        let Some((r_new, s_new, trial)) = accepted else {
            return Ok(Descent { loss: current, iters, converged: true });
        };
        let rel = (current - trial) / current;
        *r = r_new;
        *s = s_new;
        current = trial;
        iters += 1;
        if rel < cfg.rel_tol {
            return Ok(Descent { loss: current, iters, converged: true });
        }
    }
    Ok(Descent { loss: current, iters, converged: false })
}

/// Aligns `f` to `g`, starting from `r ≡ 1`, `s ≡ 0`.
///
/// The shift smoothness weight is relaxed in stages (`w_s` times each entry
/// of `s_continuation`, ending at `w_s` itself) so that a stiff, nearly
/// constant shift is found before local detail is allowed. The returned
/// point is a local minimizer of the objective with the configured `w_s`.
pub fn warp(f: &[f64], g: &[f64], cfg: &WarpConfig) -> Result<WarpResult> {
    let n = f.len();
    if g.len() != n {
        return Err(Error::LengthMismatch(n, g.len()));
    }
    if n < 2 {
        return Err(Error::LengthMismatch(n, 2));
    }
    if f.iter().chain(g).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    cfg.validate()?;

    let mut r = vec![1.0; n];
    let mut s = vec![0.0; n];
    let mut iters = 0;
    let mut step = cfg.step_size;
    let mut stage_cfg = cfg.clone();
    for &factor in cfg.s_continuation.iter().filter(|&&m| m > 1.0) {
        stage_cfg.w_s = cfg.w_s * factor;
        let d = descend(f, g, &mut r, &mut s, &stage_cfg, &mut step, cfg.max_iters - iters)?;
        iters += d.iters;
    }
    let d = descend(f, g, &mut r, &mut s, cfg, &mut step, cfg.max_iters - iters)?;
    iters += d.iters;

    Ok(WarpResult {
        r,
        s,
        loss: d.loss,
        converged: d.converged,
        iters,
    })
}

/// Merges a warped pair into one beat:
/// `½ (√r(t) f(t - s(t)/2) + g(t + s(t)/2) / √r(t))`.
pub fn merge_pair(f: &[f64], g: &[f64], result: &WarpResult) -> Result<Vec<f64>> {
    let n = f.len();
    for len in [g.len(), result.r.len(), result.s.len()] {
        if len != n {
            return Err(Error::LengthMismatch(n, len));
        }
    }
    if let Some((index, &value)) = result.r.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveRatio { index, value });
    }
    Ok((0..n)
        .map(|t| {
            let root = result.r[t].sqrt();
            let half = result.s[t] / 2.0;
            0.5 * (root * interp_clamped(f, t as f64 - half) + interp_clamped(g, t as f64 + half) / root)
        })
        .collect())
}
