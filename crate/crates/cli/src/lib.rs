//! Experiment runner behind the `dephase` binary.
//!
//! Each subcommand resolves an [`ExperimentConfig`] from flags, an optional
//! `key=value` config file and `DEPHASE_SEED`, runs the experiment and writes
//! CSV or JSON. Rows always come out in a fixed sorted order, so a run is
//! reproducible from its flags alone.

pub mod commands;
pub mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use dephase::dephasing::FidelityCurve;
use dephase::ensembles::DeviationStats;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use commands::CaseRow;
pub use config::{CommandKind, ExperimentConfig, Flags, Format, SEED_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Capacity(String),
    #[error(transparent)]
    Core(#[from] dephase::Error),
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for invalid input, 3 for capacity limits, 1 when output fails.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Input { .. } => 2,
            CliError::Capacity(_) => 3,
            CliError::Core(e) if e.is_capacity() => 3,
            CliError::Core(_) => 2,
            CliError::Output { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dephase", version, about = "Collective dephasing experiments for spin-qubit registers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random states in manifold k vs the generalized-W reference.
    Figure2(Flags),
    /// One basis per manifold vs the ladder reference (variants a, b).
    Figure3(Flags),
    /// Random weights on the full basis vs 1/√n.
    Figure4(Flags),
    /// Closed-form and computed ratios of every state class at one n.
    Table1(Flags),
    /// Exact fidelity curve of one state.
    Curve(Flags),
    /// Closed-form and computed ratios over an n range.
    Sweep(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Figure2(f) => (CommandKind::Figure2, f),
            Command::Figure3(f) => (CommandKind::Figure3, f),
            Command::Figure4(f) => (CommandKind::Figure4, f),
            Command::Table1(f) => (CommandKind::Table1, f),
            Command::Curve(f) => (CommandKind::Curve, f),
            Command::Sweep(f) => (CommandKind::Sweep, f),
        }
    }
}

/// Result of one command.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Deviations(Vec<DeviationStats>),
    Cases(Vec<CaseRow>),
    Curve(FidelityCurve),
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    Ok(match cfg.command {
        CommandKind::Figure2 => Report::Deviations(commands::figure2(cfg)?),
        CommandKind::Figure3 => Report::Deviations(commands::figure3(cfg)?),
        CommandKind::Figure4 => Report::Deviations(commands::figure4(cfg)?),
        CommandKind::Table1 => Report::Cases(commands::table1(cfg)?),
        CommandKind::Sweep => Report::Cases(commands::sweep(cfg)?),
        CommandKind::Curve => Report::Curve(commands::curve(cfg)?),
    })
}

/// Summary columns of a figure row; per-sample ratios are JSON-only.
#[derive(Serialize)]
struct DeviationRow<'a> {
    family: &'a str,
    n: usize,
    k: Option<usize>,
    case: &'a str,
    nu: f64,
    reference: f64,
    max_abs_dev: f64,
    mean: f64,
    std: f64,
    count: usize,
    seed: u64,
}

impl<'a> From<&'a DeviationStats> for DeviationRow<'a> {
    fn from(s: &'a DeviationStats) -> Self {
        DeviationRow {
            family: &s.family,
            n: s.n,
            k: s.k,
            case: &s.case,
            nu: s.nu,
            reference: s.reference,
            max_abs_dev: s.max_abs_dev,
            mean: s.mean,
            std: s.std,
            count: s.count,
            seed: s.seed,
        }
    }
}

/// Header of figure CSV output.
pub const FIGURE_CSV_HEADER: &str = "family,n,k,case,nu,reference,max_abs_dev,mean,std,count,seed";

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &str) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialize to CSV");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8");
    format!("{header}\n{body}")
}

/// Render a report. JSON carries the resolved config alongside the rows;
/// figure JSON additionally lists every sample ratio.
pub fn render(report: &Report, cfg: &ExperimentConfig) -> String {
    match (report, cfg.format) {
        (Report::Deviations(rows), Format::Csv) => {
            to_csv(rows.iter().map(DeviationRow::from), FIGURE_CSV_HEADER)
        }
        (Report::Cases(rows), Format::Csv) => to_csv(rows, CaseRow::CSV_HEADER),
        (Report::Curve(c), Format::Csv) => c.to_csv(),
        (Report::Deviations(rows), Format::Json) => pretty(&json!({ "config": cfg, "rows": rows })),
        (Report::Cases(rows), Format::Json) => pretty(&json!({ "config": cfg, "rows": rows })),
        (Report::Curve(c), Format::Json) => pretty(&json!({
            "config": cfg,
            "n": c.n,
            "times": c.times,
            "values": c.values,
        })),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Merge flags with their config file and the environment.
pub fn resolve(kind: CommandKind, flags: Flags, env_seed: Option<&str>) -> Result<ExperimentConfig, CliError> {
    let merged = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input {
                path: path.clone(),
                source: e,
            })?;
            let base = path.parent().unwrap_or(Path::new("."));
            let file = config::parse_config(&text, base)?;
            flags.or(file)
        }
        None => flags,
    };
    ExperimentConfig::resolve(kind, merged, env_seed)
}

/// Run a parsed command line and write its output to `--out` or `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (kind, flags) = cli.command.split();
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = resolve(kind, flags, env_seed.as_deref())?;
    let text = render(&run(&cfg)?, &cfg);
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Output {
            path: path.clone(),
            source: e,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}
