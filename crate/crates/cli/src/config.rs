//! Flag, config-file and environment resolution.
//!
//! Precedence is command-line flag, then `--config` file, then the
//! `DEPHASE_SEED` environment variable (seed only), then the command default.

use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use dephase::ensembles::{AmplitudeLaw, DEFAULT_COUNT};
use serde::Serialize;

use crate::CliError;

/// Environment variable supplying a default seed.
pub const SEED_ENV: &str = "DEPHASE_SEED";

/// Inclusive qubit-count range written `A:B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn single(n: usize) -> Self {
        NRange { lo: n, hi: n }
    }

    pub fn iter(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
        let lo: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let hi: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if lo > hi {
            return Err(format!("empty range {lo}:{hi}"));
        }
        Ok(NRange { lo, hi })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Figure 3 variants: random bases per manifold (`a`) or the fixed ladder
/// bases (`b`), both with random weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Amplitudes {
    /// Normalized complex Gaussian amplitudes.
    Gaussian,
    /// Equal real amplitudes (reproduces the reference state).
    Equal,
}

impl From<Amplitudes> for AmplitudeLaw {
    fn from(a: Amplitudes) -> Self {
        match a {
            Amplitudes::Gaussian => AmplitudeLaw::ComplexGaussian,
            Amplitudes::Equal => AmplitudeLaw::Equal,
        }
    }
}

/// Named states; the letters are the canonical case labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateName {
    /// A: all spins up.
    #[value(alias = "A")]
    Product,
    /// B: `d1|1…1⟩ + d2|k⟩` (`--k`, `--d1`).
    #[value(alias = "B")]
    Two,
    /// B with `k = n` and equal weights.
    Ghz,
    /// C: the W state (attains the case C lower bound).
    #[value(alias = "C")]
    W,
    /// D: equal weights over manifold `--k`.
    #[value(alias = "D")]
    Wk,
    /// E: one basis per manifold.
    #[value(alias = "E")]
    Ladder,
    /// F: all `2ⁿ` bases.
    #[value(alias = "F")]
    Full,
}

impl StateName {
    pub fn uses_k(self) -> bool {
        matches!(self, StateName::Two | StateName::Wk)
    }
}

/// Flags shared by every subcommand. All are optional so that a config file
/// can fill the gaps.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Flags {
    /// Single qubit count; same as `--n-range N:N`.
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Inclusive qubit-count range.
    #[arg(long, value_name = "A:B")]
    pub n_range: Option<NRange>,
    /// Manifold index (comma-separated list where a command iterates).
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Decay exponent ν (comma-separated list where a command iterates).
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    /// Random states per ensemble.
    #[arg(long)]
    pub count: Option<usize>,
    /// Ensemble seed; defaults to $DEPHASE_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `key=value` file with flag names as keys; flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Figure 3 variants to run.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub variant: Option<Vec<Variant>>,
    /// Amplitude law of ensemble samples.
    #[arg(long, value_enum)]
    pub amplitudes: Option<Amplitudes>,
    /// Named states or case letters (comma-separated list where a command iterates).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub state: Option<Vec<StateName>>,
    /// State in `re im bitstring` line format, instead of `--state`.
    #[arg(long, value_name = "PATH")]
    pub state_file: Option<PathBuf>,
    /// `|d1|` of the two-state class.
    #[arg(long)]
    pub d1: Option<f64>,
    /// Single-qubit decay time of the first kernel.
    #[arg(long)]
    pub t_single: Option<f64>,
    /// Exponent of an optional second, independent kernel.
    #[arg(long)]
    pub nu2: Option<f64>,
    /// Single-qubit time of the second kernel.
    #[arg(long)]
    pub t_single2: Option<f64>,
    /// Number of time-grid points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fidelity at which the default time grid ends.
    #[arg(long)]
    pub f_end: Option<f64>,
    /// End of the time grid, overriding `--f-end`.
    #[arg(long)]
    pub t_max: Option<f64>,
}

impl Flags {
    /// Field-wise `self` over `file`; `--n`/`--n-range` count as one setting.
    pub fn or(self, file: Flags) -> Flags {
        let (n, n_range) = if self.n.is_some() || self.n_range.is_some() {
            (self.n, self.n_range)
        } else {
            (file.n, file.n_range)
        };
        Flags {
            n,
            n_range,
            k: self.k.or(file.k),
            nu: self.nu.or(file.nu),
            count: self.count.or(file.count),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            config: self.config,
            variant: self.variant.or(file.variant),
            amplitudes: self.amplitudes.or(file.amplitudes),
            state: self.state.or(file.state),
            state_file: self.state_file.or(file.state_file),
            d1: self.d1.or(file.d1),
            t_single: self.t_single.or(file.t_single),
            nu2: self.nu2.or(file.nu2),
            t_single2: self.t_single2.or(file.t_single2),
            points: self.points.or(file.points),
            f_end: self.f_end.or(file.f_end),
            t_max: self.t_max.or(file.t_max),
        }
    }
}

fn scalar<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| e.to_string())
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|v| scalar(v.trim())).collect()
}

fn choice<E: ValueEnum>(value: &str) -> Result<E, String> {
    E::from_str(value, false)
}

fn choices<E: ValueEnum>(value: &str) -> Result<Vec<E>, String> {
    value.split(',').map(|v| choice(v.trim())).collect()
}

/// Parse a `key=value` config file. Keys are long flag names (`-` or `_`);
/// blank lines and `#` comments are skipped; relative paths are taken
/// relative to `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<Flags, CliError> {
    let mut f = Flags::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Validation(format!("config line {}: {msg}", i + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !seen.insert(key.clone()) {
            return Err(err(format!("duplicate key {key:?}")));
        }
        let bad = |msg: String| err(format!("{key}: {msg}"));
        let path = || base.join(value);
        match key.as_str() {
            "n" => f.n = Some(scalar(value).map_err(bad)?),
            "n-range" => f.n_range = Some(scalar(value).map_err(bad)?),
            "k" => f.k = Some(list(value).map_err(bad)?),
            "nu" => f.nu = Some(list(value).map_err(bad)?),
            "count" => f.count = Some(scalar(value).map_err(bad)?),
            "seed" => f.seed = Some(scalar(value).map_err(bad)?),
            "out" => f.out = Some(path()),
            "format" => f.format = Some(choice(value).map_err(bad)?),
            "variant" => f.variant = Some(choices(value).map_err(bad)?),
            "amplitudes" => f.amplitudes = Some(choice(value).map_err(bad)?),
            "state" => f.state = Some(choices(value).map_err(bad)?),
            "state-file" => f.state_file = Some(path()),
            "d1" => f.d1 = Some(scalar(value).map_err(bad)?),
            "t-single" => f.t_single = Some(scalar(value).map_err(bad)?),
            "nu2" => f.nu2 = Some(scalar(value).map_err(bad)?),
            "t-single2" => f.t_single2 = Some(scalar(value).map_err(bad)?),
            "points" => f.points = Some(scalar(value).map_err(bad)?),
            "f-end" => f.f_end = Some(scalar(value).map_err(bad)?),
            "t-max" => f.t_max = Some(scalar(value).map_err(bad)?),
            _ => return Err(err(format!("unknown key {key:?}"))),
        }
    }
    if f.n.is_some() && f.n_range.is_some() {
        return Err(CliError::Validation(
            "config sets both n and n-range".into(),
        ));
    }
    Ok(f)
}

/// The subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Figure2,
    Figure3,
    Figure4,
    Table1,
    Curve,
    Sweep,
}

/// Time grid of the `curve` command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub f_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

/// A fully resolved, validated parameter set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub n_range: NRange,
    pub k: Vec<usize>,
    pub nu: Vec<f64>,
    pub count: usize,
    pub seed: u64,
    pub amplitudes: AmplitudeLaw,
    pub variants: Vec<Variant>,
    pub states: Vec<StateName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_file: Option<PathBuf>,
    pub d1: f64,
    pub t_single: f64,
    /// Second kernel `(ν, T)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_kernel: Option<(f64, f64)>,
    pub grid: GridSpec,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn sorted<T: PartialOrd + Copy>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("validated values are ordered"));
    v.dedup();
    v
}

impl ExperimentConfig {
    /// Apply command defaults to merged flags and validate the result.
    /// `env_seed` is the raw value of [`SEED_ENV`], if set.
    pub fn resolve(command: CommandKind, f: Flags, env_seed: Option<&str>) -> Result<Self, CliError> {
        use CommandKind::*;
        let n_range = match (f.n, f.n_range) {
            (Some(n), _) => NRange::single(n),
            (None, Some(r)) => r,
            (None, None) => match command {
                Figure2 | Figure3 => NRange { lo: 7, hi: 20 },
                Figure4 => NRange { lo: 7, hi: 12 },
                Table1 => NRange::single(8),
                Curve => NRange::single(4),
                Sweep => NRange { lo: 2, hi: 20 },
            },
        };
        if n_range.lo == 0 {
            return Err(invalid("qubit counts start at 1"));
        }
        let k = sorted(f.k.unwrap_or_else(|| match command {
            Figure2 => vec![2, 3, 4],
            Curve => vec![1],
            _ => vec![2],
        }));
        let nu = f.nu.unwrap_or_else(|| match command {
            Table1 => vec![1.0, 2.0, 4.0, 6.0],
            _ => vec![2.0],
        });
        if nu.is_empty() || nu.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid(format!("decay exponents must be positive, got {nu:?}")));
        }
        let nu = sorted(nu);
        let count = f.count.unwrap_or(DEFAULT_COUNT);
        if count == 0 {
            return Err(invalid("--count must be at least 1"));
        }
        let seed = match (f.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(raw)) => raw
                .trim()
                .parse()
                .map_err(|e| invalid(format!("{SEED_ENV}={raw:?}: {e}")))?,
            (None, None) => 0,
        };
        let d1 = f.d1.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
        if !(0.0..=1.0).contains(&d1) {
            return Err(invalid(format!("--d1 must lie in [0, 1], got {d1}")));
        }
        let t_single = f.t_single.unwrap_or(1.0);
        let second_kernel = match (f.nu2, f.t_single2) {
            (None, None) => None,
            (nu2, t2) => Some((nu2.unwrap_or(nu[0]), t2.unwrap_or(t_single))),
        };
        for t in std::iter::once(t_single).chain(second_kernel.map(|k| k.1)) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("single-qubit times must be positive, got {t}")));
            }
        }
        if let Some((nu2, _)) = second_kernel {
            if !(nu2 > 0.0 && nu2.is_finite()) {
                return Err(invalid(format!("--nu2 must be positive, got {nu2}")));
            }
        }
        let grid = GridSpec {
            points: f.points.unwrap_or(64),
            f_end: f.f_end.unwrap_or(0.8),
            t_max: f.t_max,
        };
        if grid.points == 0 {
            return Err(invalid("time grid is empty (--points 0)"));
        }
        if !(grid.f_end > 0.0 && grid.f_end < 1.0) {
            return Err(invalid(format!("--f-end must lie in (0, 1), got {}", grid.f_end)));
        }
        if let Some(t) = grid.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("--t-max must be positive, got {t}")));
            }
        }
        let states = f.state.unwrap_or_else(|| match command {
            Curve => vec![StateName::Ghz],
            _ => vec![
                StateName::Product,
                StateName::Two,
                StateName::Ghz,
                StateName::W,
                StateName::Wk,
                StateName::Ladder,
                StateName::Full,
            ],
        });
        let states = sorted(states);

        let cfg = ExperimentConfig {
            command,
            n_range,
            k,
            nu,
            count,
            seed,
            amplitudes: f.amplitudes.map(Into::into).unwrap_or_default(),
            variants: sorted(f.variant.unwrap_or_else(|| vec![Variant::A, Variant::B])),
            states,
            state_file: f.state_file,
            d1,
            t_single,
            second_kernel,
            grid,
            out: f.out,
            format: f.format.unwrap_or_default(),
        };
        cfg.check_command()?;
        Ok(cfg)
    }

    fn check_command(&self) -> Result<(), CliError> {
        match self.command {
            CommandKind::Table1 if self.n_range.lo != self.n_range.hi => {
                Err(invalid("table1 takes a single --n; use sweep for ranges"))
            }
            CommandKind::Curve => {
                if self.n_range.lo != self.n_range.hi {
                    return Err(invalid("curve takes a single --n"));
                }
                if self.states.len() != 1 {
                    return Err(invalid("curve takes a single --state"));
                }
                if self.k.len() != 1 {
                    return Err(invalid("curve takes a single --k"));
                }
                if self.nu.len() != 1 {
                    return Err(invalid("curve takes a single --nu; use --nu2 for a second kernel"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
