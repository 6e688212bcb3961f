//! Closed-form scaling ratios of the canonical state classes.

use serde::{Deserialize, Serialize};

use super::ratio::{Method, Ratio, ScalingResult};
use crate::states::{SuperposedState, MAX_QUBITS};
use crate::{Error, Result};

/// The canonical state families, labelled `A`–`F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum StateClass {
    /// A: a single product state.
    Product { n: usize },
    /// B: `d1|1…1⟩ + d2|k⟩`; `|d2| = √(1 − d1_abs²)`.
    TwoState { n: usize, k: usize, d1_abs: f64 },
    /// C: arbitrary weights on the `k = 1` manifold; only bounds are known.
    SingleFlip { n: usize },
    /// D: equal weights over manifold `k`.
    GeneralizedW { n: usize, k: usize },
    /// E: one basis per manifold `1..=n`, equal weights.
    Ladder { n: usize },
    /// F: all `2ⁿ` bases, equal weights.
    Full { n: usize },
}

impl StateClass {
    pub fn label(&self) -> &'static str {
        match self {
            StateClass::Product { .. } => "A",
            StateClass::TwoState { .. } => "B",
            StateClass::SingleFlip { .. } => "C",
            StateClass::GeneralizedW { .. } => "D",
            StateClass::Ladder { .. } => "E",
            StateClass::Full { .. } => "F",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            StateClass::Product { n }
            | StateClass::TwoState { n, .. }
            | StateClass::SingleFlip { n }
            | StateClass::GeneralizedW { n, .. }
            | StateClass::Ladder { n }
            | StateClass::Full { n } => n,
        }
    }

    pub fn k(&self) -> Option<usize> {
        match *self {
            StateClass::TwoState { k, .. } | StateClass::GeneralizedW { k, .. } => Some(k),
            StateClass::SingleFlip { .. } => Some(1),
            _ => None,
        }
    }

    /// GHZ is the two-state class with `k = n` and equal weights.
    pub fn ghz(n: usize) -> Self {
        StateClass::TwoState {
            n,
            k: n,
            d1_abs: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!("qubit count {n} out of range 1..={MAX_QUBITS}")));
        }
        match *self {
            StateClass::TwoState { k, d1_abs, .. } => {
                if k == 0 || k > n {
                    return Err(Error::invalid(format!("case B needs 1 ≤ k ≤ n, got k={k}")));
                }
                if !(0.0..=1.0).contains(&d1_abs) {
                    return Err(Error::invalid(format!("|d1| = {d1_abs} outside [0, 1]")));
                }
            }
            StateClass::SingleFlip { .. } if n < 2 => {
                return Err(Error::invalid("case C needs n ≥ 2"));
            }
            StateClass::GeneralizedW { k, .. } if k > n => {
                return Err(Error::invalid(format!("case D needs k ≤ n, got k={k}, n={n}")));
            }
            StateClass::Ladder { .. } if n < 2 => {
                return Err(Error::invalid("case E needs n ≥ 2"));
            }
            _ => {}
        }
        Ok(())
    }

    /// The representative state of the class (case C: the equal-weight W state).
    pub fn build(&self) -> Result<SuperposedState> {
        self.validate()?;
        match *self {
            StateClass::Product { n } => Ok(SuperposedState::product(
                crate::states::ProductState::all_up(n)?,
            )),
            StateClass::TwoState { n, k, d1_abs } => {
                let d2 = (1.0 - d1_abs * d1_abs).max(0.0).sqrt();
                SuperposedState::two_state(
                    n,
                    k,
                    num_complex::Complex64::new(d1_abs, 0.0),
                    num_complex::Complex64::new(d2, 0.0),
                )
            }
            StateClass::SingleFlip { n } => SuperposedState::w(n),
            StateClass::GeneralizedW { n, k } => SuperposedState::w_generalized(n, k),
            StateClass::Ladder { n } => SuperposedState::ladder(n),
            StateClass::Full { n } => SuperposedState::full_superposition(n),
        }
    }
}

/// A closed-form prediction: a value, or a bound pair for case C.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    Exact(ScalingResult),
    Bounds { lower: f64, upper: Ratio },
}

impl ClosedForm {
    pub fn exact(&self) -> Option<&ScalingResult> {
        match self {
            ClosedForm::Exact(r) => Some(r),
            ClosedForm::Bounds { .. } => None,
        }
    }
}

/// Closed-form `T(n)/T(1)` for a state class at decay exponent `ν`.
///
/// The Gaussian (`ν = 2`) expressions are
///
/// * B: `1/(2|d1 d2|√k)`
/// * C: `½√(n/(n−1)) ≤ ratio ≤ ∞`
/// * D: `½√(n/(k(n−k)))`, no decoherence for `k ∈ {0, n}`
/// * E: `√(3n/(2(n²−1)))`
/// * F: `1/√n`
///
/// and every one of them is raised to the power `2/ν` for other exponents.
pub fn closed_form_ratio(class: &StateClass, nu: f64) -> Result<ClosedForm> {
    class.validate()?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("decay exponent must be positive, got {nu}")));
    }
    let rescale = |r2: f64| if nu == 2.0 { r2 } else { r2.powf(2.0 / nu) };
    let n = class.n() as f64;
    let gaussian = match *class {
        StateClass::Product { .. } => None,
        StateClass::TwoState { k, d1_abs, .. } => {
            let d2 = (1.0 - d1_abs * d1_abs).max(0.0).sqrt();
            let amp = d1_abs * d2;
            (amp > 0.0).then(|| 1.0 / (2.0 * amp * (k as f64).sqrt()))
        }
        StateClass::SingleFlip { .. } => {
            return Ok(ClosedForm::Bounds {
                lower: rescale(0.5 * (n / (n - 1.0)).sqrt()),
                upper: Ratio::NoDecoherence,
            });
        }
        StateClass::GeneralizedW { n: nn, k } => {
            (k != 0 && k != nn).then(|| 0.5 * (n / (k as f64 * (n - k as f64))).sqrt())
        }
        StateClass::Ladder { .. } => Some((3.0 * n / (2.0 * (n * n - 1.0))).sqrt()),
        StateClass::Full { .. } => Some(1.0 / n.sqrt()),
    };
    let ratio = match gaussian {
        Some(r2) => Ratio::Finite(rescale(r2)),
        None => Ratio::NoDecoherence,
    };
    Ok(ClosedForm::Exact(
        ScalingResult::new(class.n(), nu, ratio, Method::ClosedForm).with_case(class.label(), class.k()),
    ))
}
