//! Scaling ratios `T(n)/T(1)` and their serialized form.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::histogram::mean_pair_distance;
use super::kernel::DecayKernel;
use crate::states::SuperposedState;

/// A decoherence-time ratio, or the absence of any decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    NoDecoherence,
}

impl Ratio {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Ratio::Finite(r) => Some(r),
            Ratio::NoDecoherence => None,
        }
    }

    /// Finite ratio or `+∞`.
    pub fn as_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Ratio::Finite(r) => s.serialize_f64(r),
            Ratio::NoDecoherence => s.serialize_str("no_decoherence"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(Ratio::Finite(r)),
            Raw::Str(s) if s == "no_decoherence" => Ok(Ratio::NoDecoherence),
            Raw::Str(s) => Err(de::Error::custom(format!("unexpected ratio {s:?}"))),
        }
    }
}

/// How a [`ScalingResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AnalyticB,
    ClosedForm,
    Fit,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub case: String,
    pub nu: f64,
    pub ratio: Ratio,
    pub method: Method,
}

impl ScalingResult {
    pub fn new(n: usize, nu: f64, ratio: Ratio, method: Method) -> Self {
        ScalingResult {
            n,
            k: None,
            case: "custom".into(),
            nu,
            ratio,
            method,
        }
    }

    pub fn with_case(mut self, case: impl Into<String>, k: Option<usize>) -> Self {
        self.case = case.into();
        self.k = k;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scaling result serializes")
    }
}

/// `(2/𝓑)^{1/ν}` with `𝓑 = 8·mean_pair_distance`; `√` at `ν = 2`.
pub(crate) fn ratio_from_script_b(script_b: f64, nu: f64) -> f64 {
    let base = 2.0 / script_b;
    if nu == 2.0 {
        base.sqrt()
    } else {
        base.powf(1.0 / nu)
    }
}

/// Short-time scaling ratio of a state under a single decay law.
///
/// Expanding the exact fidelity for small `t` gives
/// `F ≈ 1 − 4·Σ_j j·w_j·(t/T)^ν`, hence `T(n)/T(1) = (2/𝓑)^{1/ν}`. The ratio
/// depends on the kernel only through `ν`; `T(1)` cancels.
pub fn ratio_analytic(x: &SuperposedState, kernel: &DecayKernel) -> ScalingResult {
    let nu = kernel.nu();
    let ratio = if x.support() < 2 {
        Ratio::NoDecoherence
    } else {
        Ratio::Finite(ratio_from_script_b(8.0 * mean_pair_distance(x), nu))
    };
    ScalingResult::new(x.n(), nu, ratio, Method::AnalyticB)
}

/// `T(n)` in the kernel's time units, `None` when the state does not decay.
pub fn decoherence_time(x: &SuperposedState, kernel: &DecayKernel) -> Option<f64> {
    ratio_analytic(x, kernel)
        .ratio
        .value()
        .map(|r| r * kernel.t_single())
}
