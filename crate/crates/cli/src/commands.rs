//! The experiments behind each subcommand.

use std::fs;

use dephase::dephasing::{
    closed_form_ratio, fidelity_exact, ratio_analytic, ClosedForm, DecayKernel,
    FidelityCurve, Ratio, StateClass,
};
use dephase::ensembles::{deviation_stats, DeviationStats, EnsembleFamily, EnsembleSpec};
use dephase::states::SuperposedState;
use dephase::Error;
use serde::Serialize;

use crate::config::{ExperimentConfig, StateName, Variant};
use crate::CliError;

/// Largest `n` of the full-basis figure.
pub const FIGURE4_MAX_N: usize = 12;
/// Manifolds covered by the single-manifold figure.
pub const FIGURE2_K: std::ops::RangeInclusive<usize> = 2..=4;

fn ensemble_rows(
    cfg: &ExperimentConfig,
    families: impl IntoIterator<Item = EnsembleFamily>,
) -> Result<Vec<DeviationStats>, CliError> {
    let mut rows = Vec::new();
    for family in families {
        let spec = EnsembleSpec::new(family, cfg.count, cfg.seed).with_amplitudes(cfg.amplitudes);
        for &nu in &cfg.nu {
            rows.push(deviation_stats(&spec, nu)?);
        }
    }
    Ok(rows)
}

/// Random states in manifold `k` against the equal-weight reference, one row
/// per `(n, k, ν)`.
pub fn figure2(cfg: &ExperimentConfig) -> Result<Vec<DeviationStats>, CliError> {
    if let Some(k) = cfg.k.iter().find(|k| !FIGURE2_K.contains(k)) {
        return Err(CliError::Validation(format!(
            "figure2 covers {} ≤ k ≤ {}, got k={k}",
            FIGURE2_K.start(),
            FIGURE2_K.end()
        )));
    }
    let families = cfg
        .n_range
        .iter()
        .flat_map(|n| cfg.k.iter().map(move |&k| EnsembleFamily::RandomInManifold { n, k }));
    ensemble_rows(cfg, families)
}

/// One basis per manifold against the ladder reference, one row per
/// `(variant, n, ν)`.
pub fn figure3(cfg: &ExperimentConfig) -> Result<Vec<DeviationStats>, CliError> {
    let families = cfg.variants.iter().flat_map(|&v| {
        cfg.n_range.iter().map(move |n| match v {
            Variant::A => EnsembleFamily::RandomCrossManifold { n },
            Variant::B => EnsembleFamily::LadderRandomWeights { n },
        })
    });
    ensemble_rows(cfg, families)
}

/// Random weights on the full basis against `1/√n`, one row per `(n, ν)`.
pub fn figure4(cfg: &ExperimentConfig) -> Result<Vec<DeviationStats>, CliError> {
    if cfg.n_range.hi > FIGURE4_MAX_N {
        return Err(CliError::Capacity(format!(
            "figure4 enumerates all 2ⁿ bases up to n = {FIGURE4_MAX_N}, got n = {}",
            cfg.n_range.hi
        )));
    }
    let families = cfg
        .n_range
        .iter()
        .map(|n| EnsembleFamily::FullBasisRandomWeights { n });
    ensemble_rows(cfg, families)
}

/// Closed-form prediction and engine value for one state class at one `ν`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: &'static str,
    pub state: StateName,
    pub n: usize,
    pub k: Option<usize>,
    pub nu: f64,
    /// Exact closed form; absent for case C.
    pub closed_form: Option<Ratio>,
    /// Case C bounds.
    pub lower: Option<f64>,
    pub upper: Option<Ratio>,
    /// `ratio_analytic` on the representative state; absent beyond capacity.
    pub analytic: Option<Ratio>,
}

impl CaseRow {
    pub const CSV_HEADER: &'static str = "case,state,n,k,nu,closed_form,lower,upper,analytic";
}

/// The class a named state stands for.
pub fn state_class(state: StateName, n: usize, k: usize, d1: f64) -> StateClass {
    match state {
        StateName::Product => StateClass::Product { n },
        StateName::Two => StateClass::TwoState { n, k, d1_abs: d1 },
        StateName::Ghz => StateClass::ghz(n),
        StateName::W => StateClass::SingleFlip { n },
        StateName::Wk => StateClass::GeneralizedW { n, k },
        StateName::Ladder => StateClass::Ladder { n },
        StateName::Full => StateClass::Full { n },
    }
}

fn case_row(state: StateName, class: StateClass, nu: f64) -> Result<CaseRow, Error> {
    let (closed_form, lower, upper) = match closed_form_ratio(&class, nu)? {
        ClosedForm::Exact(r) => (Some(r.ratio), None, None),
        ClosedForm::Bounds { lower, upper } => (None, Some(lower), Some(upper)),
    };
    let analytic = match class.build() {
        Ok(x) => Some(ratio_analytic(&x, &DecayKernel::new(nu, 1.0)?).ratio),
        Err(e) if e.is_capacity() => None,
        Err(e) => return Err(e),
    };
    Ok(CaseRow {
        case: class.label(),
        state,
        n: class.n(),
        k: class.k(),
        nu,
        closed_form,
        lower,
        upper,
        analytic,
    })
}

/// `(state, k)` pairs in output order; `k` is only iterated where it matters.
fn state_grid(cfg: &ExperimentConfig) -> Vec<(StateName, usize)> {
    cfg.states
        .iter()
        .flat_map(|&s| {
            let ks = if s.uses_k() { cfg.k.clone() } else { vec![0] };
            ks.into_iter().map(move |k| (s, k))
        })
        .collect()
}

/// Every requested class at one `n` for each `ν`; invalid `(n, k)` is an error.
pub fn table1(cfg: &ExperimentConfig) -> Result<Vec<CaseRow>, CliError> {
    let n = cfg.n_range.lo;
    let mut rows = Vec::new();
    for (state, k) in state_grid(cfg) {
        for &nu in &cfg.nu {
            rows.push(case_row(state, state_class(state, n, k, cfg.d1), nu)?);
        }
    }
    Ok(rows)
}

/// [`table1`] over an `n` range; `(n, k)` combinations outside a class's
/// domain (such as `k > n`) are skipped.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<CaseRow>, CliError> {
    let mut rows = Vec::new();
    for (state, k) in state_grid(cfg) {
        for n in cfg.n_range.iter() {
            for &nu in &cfg.nu {
                match case_row(state, state_class(state, n, k, cfg.d1), nu) {
                    Ok(row) => rows.push(row),
                    Err(Error::Invalid(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(rows)
}

/// The state of a `curve` run: `--state-file` if given, else `--state`.
pub fn curve_state(cfg: &ExperimentConfig) -> Result<SuperposedState, CliError> {
    match &cfg.state_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input {
                path: path.clone(),
                source: e,
            })?;
            Ok(SuperposedState::parse_text(&text)?)
        }
        None => {
            let class = state_class(cfg.states[0], cfg.n_range.lo, cfg.k[0], cfg.d1);
            Ok(class.build()?)
        }
    }
}

/// Grid end where the short-time reference `exp{−Σ_c (t/τ_c)^{ν_c}}` reaches
/// `f_end`, with `τ_c = ratio_c·T_c` per kernel.
fn reference_end(x: &SuperposedState, kernels: &[DecayKernel], f_end: f64) -> Result<f64, CliError> {
    let scales: Vec<(f64, f64)> = kernels
        .iter()
        .map(|k| match ratio_analytic(x, k).ratio {
            Ratio::Finite(r) => Ok((r * k.t_single(), k.nu())),
            Ratio::NoDecoherence => Err(CliError::Validation(
                "state does not decohere; give the grid end with --t-max".into(),
            )),
        })
        .collect::<Result<_, _>>()?;
    let target = -f_end.ln();
    if let [(tau, nu)] = scales[..] {
        return Ok(tau * target.powf(1.0 / nu));
    }
    let exponent = |t: f64| scales.iter().map(|&(tau, nu)| (t / tau).powf(nu)).sum::<f64>();
    // the exponent is increasing in t; bracket, then bisect
    let mut hi = scales.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    while exponent(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if exponent(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Exact fidelity of the configured state under one or two kernels.
///
/// The default grid has `points` samples from zero to where the short-time
/// reference reaches `f_end`; `--t-max` replaces the end point.
pub fn curve(cfg: &ExperimentConfig) -> Result<FidelityCurve, CliError> {
    let x = curve_state(cfg)?;
    let mut kernels = vec![DecayKernel::new(cfg.nu[0], cfg.t_single)?];
    if let Some((nu2, t2)) = cfg.second_kernel {
        kernels.push(DecayKernel::new(nu2, t2)?);
    }
    let end = match cfg.grid.t_max {
        Some(t) => t,
        None => reference_end(&x, &kernels, cfg.grid.f_end)?,
    };
    let last = cfg.grid.points.saturating_sub(1).max(1) as f64;
    let times: Vec<f64> = (0..cfg.grid.points).map(|i| end * i as f64 / last).collect();
    Ok(fidelity_exact(&x, &times, &kernels)?)
}
