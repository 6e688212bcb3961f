//! Single-qubit decay laws and the per-pair ensemble average they induce.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A single-qubit decay law `exp{−(t/T)^ν}`.
///
/// `ν = 2` is Gaussian free-induction decay (both `T₂*` and narrowed-state
/// `T₂`), `ν = 1` exponential relaxation, `ν = 4` spin echo and `ν = 6`
/// two-pulse CPMG.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayKernel {
    nu: f64,
    t_single: f64,
}

impl DecayKernel {
    pub fn new(nu: f64, t_single: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::invalid(format!("decay exponent must be positive, got {nu}")));
        }
        if !(t_single > 0.0 && t_single.is_finite()) {
            return Err(Error::invalid(format!(
                "single-qubit time must be positive, got {t_single}"
            )));
        }
        Ok(DecayKernel { nu, t_single })
    }

    /// Gaussian (`ν = 2`) kernel with single-qubit time `t_single`.
    pub fn gaussian(t_single: f64) -> Result<Self> {
        Self::new(2.0, t_single)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn t_single(&self) -> f64 {
        self.t_single
    }

    /// Exponent `4j·(t/T)^ν` of the pair average; no argument checks.
    #[inline]
    pub(crate) fn exponent(&self, j: usize, t: f64) -> f64 {
        4.0 * j as f64 * (t / self.t_single).powf(self.nu)
    }
}

/// Ensemble average `M[cos θt]` for a pair of bases differing in `j` spins.
///
/// Each differing spin contributes `(l^k − l^r)² = 4` independent units of
/// phase variance, so the average is `exp{−4j·(t/T)^ν}`. At `ν = 2` this is
/// `exp{−j·[2t/T]²}` and a single qubit in `(|1⟩+|1̄⟩)/√2` has fidelity
/// `≈ exp{−(t/T)^ν}` at short times for every `ν`.
pub fn pair_kernel(j: usize, t: f64, kernel: &DecayKernel) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    Ok((-kernel.exponent(j, t)).exp())
}
