//! Independent cross-checks of the dephasing engine.
//!
//! [`mc_fidelity`] and [`mc_pair_decay`] sample explicit quasi-static
//! Overhauser fields and average the resulting random phases; nothing is
//! shared with the histogram path except the state itself.
//! [`brute_force_fidelity`] re-evaluates the fidelity sum pair by pair.
//!
//! Field calibration: a pair differing in one spin accumulates `θ = 2B t`,
//! and `M[e^{iθ}] = exp{−2σ²t²}` for Gaussian `B`. Matching the single-spin
//! pair decay `exp{−4(t/T₂*)²}` fixes `σ = √2 / T₂*`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::DecayKernel;
use crate::states::SuperposedState;
use crate::{Error, Result};

/// Fewest shots a Monte-Carlo estimate accepts.
pub const MIN_SHOTS: usize = 100;

/// Shots per RNG stream; fixed so results do not depend on the thread count.
const CHUNK: usize = 1024;

/// Largest term count accepted by [`brute_force_fidelity`].
pub const BRUTE_FORCE_MAX_TERMS: usize = 1 << 12;

/// One draw of the longitudinal fields `B_j^z`, one per dot.
#[derive(Clone, Debug, PartialEq)]
pub struct OverhauserSample {
    pub bz: Vec<f64>,
}

impl OverhauserSample {
    /// Field standard deviation for inhomogeneous time `t2_star`.
    pub fn sigma(t2_star: f64) -> f64 {
        std::f64::consts::SQRT_2 / t2_star
    }

    pub fn draw(n: usize, field: &Normal<f64>, rng: &mut ChaCha8Rng) -> Self {
        OverhauserSample {
            bz: (0..n).map(|_| field.sample(rng)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

/// JSON diagnostics record `{t, estimate, std_err, shots}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McDiagnostics {
    pub t: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub shots: usize,
}

impl McEstimate {
    pub fn diagnostics(&self, t: f64) -> McDiagnostics {
        McDiagnostics {
            t,
            estimate: self.value,
            std_err: self.std_err,
            shots: self.n_samples,
        }
    }
}

fn check_mc(t: f64, t2_star: f64, n_samples: usize) -> Result<Normal<f64>> {
    if n_samples < MIN_SHOTS {
        return Err(Error::invalid(format!(
            "{n_samples} shots requested, need at least {MIN_SHOTS}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    if !(t2_star > 0.0 && t2_star.is_finite()) {
        return Err(Error::invalid("T2* must be positive"));
    }
    Ok(Normal::new(0.0, OverhauserSample::sigma(t2_star)).expect("finite sigma"))
}

/// Sum and sum of squares of `shot(rng)` over `n_samples` shots.
fn run_shots<F>(n_samples: usize, seed: u64, shot: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let partials: Vec<(f64, f64)> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let shots = CHUNK.min(n_samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..shots {
                let v = shot(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    // Neumaier summation over chunks in index order
    let mut acc = (0.0, 0.0);
    let mut comp = (0.0, 0.0);
    for (s, s2) in partials {
        neumaier(&mut acc.0, &mut comp.0, s);
        neumaier(&mut acc.1, &mut comp.1, s2);
    }
    (acc.0 + comp.0, acc.1 + comp.1)
}

fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

fn mean_and_err(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Monte-Carlo estimate of `F(t) = √M[|⟨x|x(t)⟩|²]`.
///
/// Basis `x_r` acquires phase `φ_r = Σ_j l_j^r B_j t`. The square root is
/// taken after averaging; `std_err` follows by the delta method.
pub fn mc_fidelity(
    x: &SuperposedState,
    t: f64,
    t2_star: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let field = check_mc(t, t2_star, n_samples)?;
    let n = x.n();
    let terms: Vec<(f64, Vec<f64>)> = x
        .terms()
        .iter()
        .map(|(d, b)| (d.norm_sqr(), (0..n).map(|j| b.spin(j) as f64).collect()))
        .collect();

    let (sum, sum_sq) = run_shots(n_samples, seed, |rng| {
        let sample = OverhauserSample::draw(n, &field, rng);
        let (mut re, mut im) = (0.0, 0.0);
        for (p, spins) in &terms {
            let phi: f64 = spins.iter().zip(&sample.bz).map(|(l, b)| l * b).sum::<f64>() * t;
            re += p * phi.cos();
            im -= p * phi.sin();
        }
        re * re + im * im
    });
    let (mean, err) = mean_and_err(sum, sum_sq, n_samples);
    let value = mean.max(0.0).sqrt();
    let std_err = if value > 0.0 { err / (2.0 * value) } else { err.sqrt() };
    Ok(McEstimate {
        value,
        std_err,
        n_samples,
    })
}

/// Monte-Carlo estimate of `M[cos θt]` for a pair differing in `j` spins,
/// `θ = Σ 2B_i` over the differing dots.
pub fn mc_pair_decay(j: usize, t: f64, t2_star: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    let field = check_mc(t, t2_star, n_samples)?;
    if j == 0 {
        return Ok(McEstimate {
            value: 1.0,
            std_err: 0.0,
            n_samples,
        });
    }
    let (sum, sum_sq) = run_shots(n_samples, seed, |rng| {
        let theta: f64 = (0..j).map(|_| 2.0 * field.sample(rng)).sum();
        (theta * t).cos()
    });
    let (value, std_err) = mean_and_err(sum, sum_sq, n_samples);
    Ok(McEstimate {
        value,
        std_err,
        n_samples,
    })
}

/// Direct double loop over basis pairs, spin by spin, with no histogram.
pub fn brute_force_fidelity(x: &SuperposedState, t: f64, kernel: &DecayKernel) -> Result<f64> {
    if x.len() > BRUTE_FORCE_MAX_TERMS {
        return Err(Error::Capacity {
            what: "brute-force terms",
            requested: x.len() as u64,
            limit: BRUTE_FORCE_MAX_TERMS as u64,
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    let n = x.n();
    let terms = x.terms();
    let scaled = (t / kernel.t_single()).powf(kernel.nu());
    let mut total = 0.0;
    for (a, (da, xa)) in terms.iter().enumerate() {
        let pa = da.norm_sqr();
        total += pa * pa;
        for (db, xb) in &terms[a + 1..] {
            let b_kr: i32 = (0..n)
                .map(|q| {
                    let diff = (xa.spin(q) - xb.spin(q)) as i32;
                    diff * diff
                })
                .sum();
            total += 2.0 * pa * db.norm_sqr() * (-(b_kr as f64) * scaled).exp();
        }
    }
    Ok(total.min(1.0).sqrt())
}
