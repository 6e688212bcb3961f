//! Exact ensemble-averaged fidelity curves and fitted decay times.

use rayon::prelude::*;

use super::histogram::{pair_histogram, PairHistogram};
use super::kernel::DecayKernel;
use super::ratio::{Method, Ratio, ScalingResult};
use crate::states::SuperposedState;
use crate::{Error, Result};

/// Sampled fidelity `F(t)` of an `n`-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityCurve {
    pub n: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FidelityCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// CSV with header `t,F`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,F\n");
        for (t, f) in self.points() {
            out.push_str(&format!("{t},{f}\n"));
        }
        out
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times must be sorted"));
    }
    Ok(())
}

/// `F(t) = √(Σ|d_r|⁴ + 2 Σ_j w_j Π_c M_c(j, t))` over independent channels `c`.
pub fn fidelity_exact(
    x: &SuperposedState,
    times: &[f64],
    kernels: &[DecayKernel],
) -> Result<FidelityCurve> {
    fidelity_from_histogram(&pair_histogram(x), times, kernels)
}

pub fn fidelity_from_histogram(
    hist: &PairHistogram,
    times: &[f64],
    kernels: &[DecayKernel],
) -> Result<FidelityCurve> {
    if kernels.is_empty() {
        return Err(Error::invalid("at least one decay kernel is required"));
    }
    check_times(times)?;
    let entries: Vec<(usize, f64)> = hist.entries().collect();
    let values = times
        .par_iter()
        .map(|&t| {
            let coherent: f64 = entries
                .iter()
                .map(|&(j, w)| {
                    let decay = kernels.iter().fold(1.0, |acc, k| acc * (-k.exponent(j, t)).exp());
                    w * decay
                })
                .sum();
            (hist.diag() + 2.0 * coherent).min(1.0).sqrt()
        })
        .collect();
    Ok(FidelityCurve {
        n: hist.n(),
        times: times.to_vec(),
        values,
    })
}

/// Minimum fidelity of samples used by [`ratio_fit`].
pub const FIT_WINDOW_MIN_F: f64 = 0.9;
/// Minimum number of in-window samples with `t > 0`.
pub const FIT_MIN_SAMPLES: usize = 8;

/// Extract `T(n)/T(1)` from a sampled curve.
///
/// Over the short-time window `F ≥ 0.9`, `−ln F` is regressed on `s = t^ν`
/// as `a·s + b·s²` with no intercept; the linear coefficient gives
/// `F ≈ exp{−(t/T_fit)^ν}` with `T_fit = a^{−1/ν}`.
pub fn ratio_fit(curve: &FidelityCurve, nu: f64, t_single: f64) -> Result<ScalingResult> {
    if !(nu > 0.0 && nu.is_finite() && t_single > 0.0 && t_single.is_finite()) {
        return Err(Error::invalid("ν and t_single must be positive"));
    }
    if curve.times.len() != curve.values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    check_times(&curve.times)?;
    if curve.values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::Fit("fidelity curve is not monotone".into()));
    }
    let result = |ratio| ScalingResult::new(curve.n, nu, ratio, Method::Fit);
    if curve.values.iter().all(|&f| f >= 1.0 - 1e-14) {
        return Ok(result(Ratio::NoDecoherence));
    }

    let window: Vec<(f64, f64)> = curve
        .points()
        .filter(|&(t, f)| t > 0.0 && f >= FIT_WINDOW_MIN_F)
        .map(|(t, f)| (t.powf(nu), -f.ln()))
        .collect();
    if window.len() < FIT_MIN_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples with F ≥ {FIT_WINDOW_MIN_F}, need {FIT_MIN_SAMPLES}",
            window.len()
        )));
    }
    let s_max = window.iter().fold(0.0f64, |m, &(s, _)| m.max(s));
    let (mut s2, mut s3, mut s4, mut sy, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(s, y) in &window {
        let u = s / s_max;
        s2 += u * u;
        s3 += u * u * u;
        s4 += u * u * u * u;
        sy += u * y;
        s2y += u * u * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.is_nan() || det.abs() <= 1e-300 {
        return Err(Error::Fit("degenerate time grid".into()));
    }
    let slope = (sy * s4 - s2y * s3) / det / s_max;
    if slope.is_nan() || slope <= 0.0 {
        return Err(Error::Fit(format!("non-positive decay coefficient {slope}")));
    }
    let t_fit = slope.powf(-1.0 / nu);
    Ok(result(Ratio::Finite(t_fit / t_single)))
}

/// Linear grid of `points` samples from zero to where `exp{−(t/T)^ν}` reaches
/// `f_end`, with `T = ratio·t_single`.
pub fn short_time_grid(ratio: f64, kernel: &DecayKernel, f_end: f64, points: usize) -> Vec<f64> {
    let t_end = ratio * kernel.t_single() * (-f_end.ln()).powf(1.0 / kernel.nu());
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points).map(|i| t_end * i as f64 / last).collect()
}
