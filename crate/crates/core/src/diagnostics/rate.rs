//! Empirical classification of the convergence-rate regime of `e_k = 𝓛̄_k − 𝓛̄_*`.
//!
//! Regimes follow the KŁ exponent `θ`: `θ = 0` finite termination, `θ ∈ (0, ½]`
//! geometric decay `e_k ~ Q^k`, `θ ∈ (½, 1)` power decay `e_k ~ k^{−r}` with
//! `r = (1−θ)/(2θ−1)`. The rate constants are fit parameters; nothing here is
//! derived from the theoretical bounds.
//!
//! The value law and the iterate law quote different exponents for the
//! sublinear case (`1/(2θ−1)` for values, `(1−θ)/(2θ−1)` for iterates). The
//! fitter reports `theta_hat = (1+r)/(1+2r)`, which inverts the iterate law;
//! read through the value law the same `r` would give `θ = (1+r)/(2r)`.

use serde::{Deserialize, Serialize};

use crate::engine::TraceRecord;

/// Minimum coefficient of determination for a regime to be accepted.
pub const MIN_R2: f64 = 0.95;
/// Minimum number of points inside the fit window.
pub const MIN_POINTS: usize = 20;
/// Fraction of the trace dropped at the end, where `e_k` is float noise.
pub const DROP_TAIL_FRACTION: f64 = 0.1;
/// `e_k` at or below `FLOOR_RTOL · max(1, e₁)` counts as zero.
pub const FLOOR_RTOL: f64 = 1e-14;

const TIE_TOL: f64 = 1e-9;
/// A finite regime must reach the floor from at least this multiple of it.
const JUMP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Finite,
    Linear,
    Sublinear,
    Inconclusive,
}

/// How to choose the burn-in index `k₀` (0-based position in `e`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnIn {
    /// First index with `e_k ≤ 0.1·e₁`, or 0 if there is none.
    #[default]
    TenthOfFirst,
    Fixed(usize),
}

/// Only the fields of the selected regime are set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub regime: Regime,
    /// KŁ exponent implied by the regime: 0 for finite, ½ for linear (the
    /// boundary of the linear range), `(1+r)/(1+2r)` for sublinear.
    pub theta_hat: Option<f64>,
    /// Geometric factor `exp(slope)` of `log e_k` against `k`.
    pub q_hat: Option<f64>,
    /// `ᾱ` with `Q = 1/(1+ᾱ)`.
    pub alpha_bar_hat: Option<f64>,
    /// Power `−slope` of `log e_k` against `log k`.
    pub r_hat: Option<f64>,
    /// Slope of `e_k^{−1/r}` against `k`.
    pub mu_hat: Option<f64>,
    pub k0: usize,
    /// Points in the fit window.
    pub n_points: usize,
    /// R² of the selected fit; for inconclusive, the best R² seen (0 if none).
    pub fit_r2: f64,
}

impl RateEstimate {
    fn bare(regime: Regime, k0: usize, n_points: usize, fit_r2: f64) -> Self {
        RateEstimate {
            regime,
            theta_hat: None,
            q_hat: None,
            alpha_bar_hat: None,
            r_hat: None,
            mu_hat: None,
            k0,
            n_points,
            fit_r2,
        }
    }
}

/// Ordinary least squares `y ≈ a + b·x`; returns `(slope, intercept, R²)`.
/// R² is 0 when `y` has no variance.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 && sxx > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 0.0 };
    (slope, intercept, r2)
}

/// `e_k = max(𝓛̄_k − 𝓛̄_final, 0)` with the last 10% of values dropped.
pub fn error_sequence(l_bar: &[f64]) -> Vec<f64> {
    let Some(&last) = l_bar.last() else { return Vec::new() };
    let keep = l_bar.len() - (l_bar.len() as f64 * DROP_TAIL_FRACTION).floor() as usize;
    l_bar[..keep].iter().map(|&v| (v - last).max(0.0)).collect()
}

/// [`error_sequence`] over the `l_bar` column of a trace.
pub fn trace_error_sequence(trace: &[TraceRecord]) -> Vec<f64> {
    let l: Vec<f64> = trace.iter().map(|r| r.l_bar).collect();
    error_sequence(&l)
}

fn burn_in(e: &[f64], policy: BurnIn) -> usize {
    match policy {
        BurnIn::Fixed(k) => k.min(e.len()),
        BurnIn::TenthOfFirst => {
            let target = 0.1 * e[0];
            e.iter().position(|&v| v <= target).unwrap_or(0)
        }
    }
}

/// Index from which `e` stays at or below `floor`, if that is reached by an
/// abrupt drop (or from the start) rather than by continued smooth decay.
fn finite_onset(e: &[f64], floor: f64) -> Option<usize> {
    let j = e.iter().rposition(|&v| v > floor).map_or(0, |i| i + 1);
    if j >= e.len() {
        return None;
    }
    (j == 0 || e[j - 1] >= JUMP_FACTOR * floor).then_some(j)
}

/// Classify `e` (entry `i` is `e_k` for `k = i + 1`).
pub fn kl_rate_fit(e: &[f64], policy: BurnIn) -> RateEstimate {
    // Too short to tell a finite drop from the zero that ends every sequence.
    if e.len() < MIN_POINTS {
        return RateEstimate::bare(Regime::Inconclusive, 0, e.len(), 0.0);
    }
    let e: Vec<f64> = e.iter().map(|&v| if v.is_finite() { v.max(0.0) } else { v }).collect();
    let floor = FLOOR_RTOL * e[0].max(1.0);
    let k0 = burn_in(&e, policy);

    if let Some(j) = finite_onset(&e, floor) {
        let mut est = RateEstimate::bare(Regime::Finite, k0, e.len() - j, 1.0);
        est.theta_hat = Some(0.0);
        return est;
    }

    // Fit window: from k0 up to the first value at the floor or non-finite.
    let end = e[k0..].iter().position(|&v| !(v > floor && v.is_finite())).map_or(e.len(), |p| k0 + p);
    let window = k0..end;
    let n = window.len();
    if n < MIN_POINTS {
        return RateEstimate::bare(Regime::Inconclusive, k0, n, 0.0);
    }
    let k: Vec<f64> = window.clone().map(|i| (i + 1) as f64).collect();
    let log_k: Vec<f64> = k.iter().map(|v| v.ln()).collect();
    let log_e: Vec<f64> = e[window.clone()].iter().map(|v| v.ln()).collect();

    let (lin_slope, _, lin_r2) = linear_regression(&k, &log_e);
    let (sub_slope, _, sub_r2) = linear_regression(&log_k, &log_e);
    let lin_ok = lin_r2 >= MIN_R2 && lin_slope < 0.0;
    let sub_ok = sub_r2 >= MIN_R2 && sub_slope < 0.0;

    let pick_linear = match (lin_ok, sub_ok) {
        (true, true) => lin_r2 + TIE_TOL >= sub_r2,
        (true, false) => true,
        (false, true) => false,
        (false, false) => {
            return RateEstimate::bare(Regime::Inconclusive, k0, n, lin_r2.max(sub_r2));
        }
    };

    if pick_linear {
        let q = lin_slope.exp();
        let mut est = RateEstimate::bare(Regime::Linear, k0, n, lin_r2);
        est.q_hat = Some(q);
        est.alpha_bar_hat = Some(1.0 / q - 1.0);
        est.theta_hat = Some(0.5);
        est
    } else {
        let r = -sub_slope;
        let lifted: Vec<f64> = e[window].iter().map(|v| v.powf(-1.0 / r)).collect();
        let (mu, _, _) = linear_regression(&k, &lifted);
        let mut est = RateEstimate::bare(Regime::Sublinear, k0, n, sub_r2);
        est.r_hat = Some(r);
        est.theta_hat = Some((1.0 + r) / (1.0 + 2.0 * r));
        est.mu_hat = Some(mu);
        est
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_on_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let (s, c, r2) = linear_regression(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_sequence_drops_tail_and_clips() {
        let l: Vec<f64> = (0..20).map(|i| 10.0 - i as f64 * 0.5).collect();
        let e = error_sequence(&l);
        assert_eq!(e.len(), 18);
        assert_eq!(e[0], 9.5);
        let e = error_sequence(&[1.0, 0.5, 0.75]);
        assert_eq!(e, vec![0.25, 0.0, 0.0]);
    }

    #[test]
    fn short_input_is_inconclusive() {
        let e: Vec<f64> = (1..10).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(kl_rate_fit(&e, BurnIn::default()).regime, Regime::Inconclusive);
        // A short sequence ending in its own final value is not evidence of termination.
        assert_eq!(kl_rate_fit(&[0.4, 0.3, 0.2, 0.1, 0.0], BurnIn::default()).regime, Regime::Inconclusive);
    }

    #[test]
    fn zero_from_k5_is_finite() {
        let e: Vec<f64> = (1..=50).map(|k| if k >= 5 { 0.0 } else { 1.0 / k as f64 }).collect();
        let est = kl_rate_fit(&e, BurnIn::default());
        assert_eq!(est.regime, Regime::Finite);
        assert_eq!(est.theta_hat, Some(0.0));
    }

    #[test]
    fn geometric_decay_into_floor_is_not_finite() {
        let e: Vec<f64> = (1..=80).map(|k| 0.5f64.powi(k)).collect();
        let est = kl_rate_fit(&e, BurnIn::default());
        assert_eq!(est.regime, Regime::Linear);
        assert!((est.q_hat.unwrap() - 0.5).abs() < 1e-6);
        assert!((est.alpha_bar_hat.unwrap() - 1.0).abs() < 1e-5);
    }
}
