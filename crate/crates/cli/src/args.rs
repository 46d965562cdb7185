use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sparsity_core::experiments::{BenchMode, Figure, ThresholdRule};
use sparsity_core::risk::{Calibration, Direction};
use sparsity_core::StopRule;

use crate::error::{CliError, CliResult};

/// Environment variable consulted when `--output-dir` is not given.
pub const OUTPUT_DIR_ENV: &str = "SPARSITY_OUTPUT_DIR";

/// Largest number of points a `start:stop:step` grid may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "sparsity", version, about = "Hard vs. soft thresholding risks, lasso and stepwise paths, and selection experiments")]
pub struct Cli {
    /// Master seed for every random quantity in the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Directory receiving result files and manifest.json.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = "out")]
    pub output_dir: PathBuf,

    /// Encoding of result tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate both risks and their ratio over a grid of true coefficients.
    RiskCurve(RiskCurveArgs),
    /// Worst-case risk ratio as one cutoff is swept and the other calibrated.
    Envelope(EnvelopeArgs),
    /// Minimize the lower-bound gap that defines the C1 constant.
    C1(C1Args),
    /// Lasso path by least angle regression.
    Lars(PathArgs),
    /// Forward stepwise path.
    Stepwise(PathArgs),
    /// Modified-RIC selection over the supports of the lasso path.
    RicSelect(RicArgs),
    /// Seeded replicas of the shrinkage and selection simulations.
    Simulate(SimulateArgs),
    /// Stepwise and lasso on planted exact-cover instances.
    Npbench(NpbenchArgs),
    /// Compare closed-form risks with Monte Carlo estimates.
    McCheck(McCheckArgs),
    /// Run a command described by a JSON config file.
    FromConfig(FromConfigArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RiskCurve(_) => "risk-curve",
            Command::Envelope(_) => "envelope",
            Command::C1(_) => "c1",
            Command::Lars(_) => "lars",
            Command::Stepwise(_) => "stepwise",
            Command::RicSelect(_) => "ric-select",
            Command::Simulate(_) => "simulate",
            Command::Npbench(_) => "npbench",
            Command::McCheck(_) => "mc-check",
            Command::FromConfig(_) => "from-config",
        }
    }

    /// The command's parameters as a JSON object.
    pub fn parameters(&self) -> serde_json::Value {
        let v = match self {
            Command::RiskCurve(a) => serde_json::to_value(a),
            Command::Envelope(a) => serde_json::to_value(a),
            Command::C1(a) => serde_json::to_value(a),
            Command::Lars(a) | Command::Stepwise(a) => serde_json::to_value(a),
            Command::RicSelect(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Npbench(a) => serde_json::to_value(a),
            Command::McCheck(a) => serde_json::to_value(a),
            Command::FromConfig(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize to JSON")
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RiskCurveArgs {
    /// Hard-threshold cutoff.
    #[arg(long, default_value_t = 3.0)]
    pub gamma0: f64,
    /// Soft-threshold cutoff.
    #[arg(long, default_value_t = 2.0)]
    pub gamma1: f64,
    /// True-coefficient grid as start:stop:step.
    #[arg(long, default_value = "0:10:0.05")]
    pub betas: String,
    /// Also write an SVG line chart.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum DirectionArg {
    #[value(name = "l0_over_l1")]
    #[serde(rename = "l0_over_l1")]
    L0OverL1,
    #[value(name = "l1_over_l0")]
    #[serde(rename = "l1_over_l0")]
    L1OverL0,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::L0OverL1 => Direction::L0OverL1,
            DirectionArg::L1OverL0 => Direction::L1OverL0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationArg {
    /// Equal risk at beta = 0.
    Zero,
    /// Opposing cutoff minimizes the worst-case ratio.
    Infimum,
    /// Both of the above.
    Both,
}

impl CalibrationArg {
    pub fn modes(self) -> Vec<Calibration> {
        match self {
            CalibrationArg::Zero => vec![Calibration::EqualRiskAtZero],
            CalibrationArg::Infimum => vec![Calibration::InfimumOptimized],
            CalibrationArg::Both => vec![Calibration::EqualRiskAtZero, Calibration::InfimumOptimized],
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EnvelopeArgs {
    /// Estimator in the numerator of the ratio.
    #[arg(long, value_enum, default_value_t = DirectionArg::L0OverL1)]
    pub direction: DirectionArg,
    /// Grid of the swept cutoff as start:stop:step.
    #[arg(long, default_value = "0.05:6:0.05")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = CalibrationArg::Both)]
    pub calibration: CalibrationArg,
    /// Also write an SVG line chart.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct C1Args {
    /// Grid on which the objective is tabulated, as start:stop:step.
    #[arg(long, default_value = "1:10:0.05")]
    pub grid: String,
    /// Also write an SVG line chart.
    #[arg(long)]
    pub svg: bool,
}

/// Where a regression problem comes from: a CSV file, or a synthetic design
/// with `k` leading unit coefficients drawn from the run seed.
#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with a header row; every column except the response is a feature.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the response column in the data file.
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Synthetic sample size.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Synthetic feature count.
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    /// Synthetic number of true features.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
    /// Synthetic pairwise feature correlation.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// `full`, `steps:N`, or `residual:EPS` (residual 2-norm below EPS).
    #[arg(long, default_value = "full", value_parser = parse_stop)]
    #[serde(serialize_with = "serialize_stop")]
    pub stop: StopRule,
}

#[derive(Debug, Args, Serialize)]
pub struct RicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Noise variance used by the criterion.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureArg {
    /// One true feature; lasso shrinkage along the path.
    Fig3,
    /// Four true features, independent columns.
    Fig4,
    /// Four true features, equicorrelated columns.
    Fig5,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::Fig3 => Figure::Fig3Shrinkage,
            FigureArg::Fig4 => Figure::Fig4Independent,
            FigureArg::Fig5 => Figure::Fig5Correlated,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = FigureArg::Fig4)]
    pub figure: FigureArg,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Overrides the figure's sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Overrides the figure's feature count.
    #[arg(long)]
    pub p: Option<usize>,
    /// Overrides the figure's number of true features.
    #[arg(long)]
    pub k: Option<usize>,
    /// Overrides the value of each true coefficient.
    #[arg(long)]
    pub signal: Option<f64>,
    /// Overrides the figure's feature correlation.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Overrides the figure's noise standard deviation.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Also write an SVG chart of the shrinkage curve (fig3 only).
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Every 3-subset of the ground set.
    All,
    /// `per_row * n` random 3-subsets including a planted cover.
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct NpbenchArgs {
    /// Ground-set sizes, each a multiple of 3.
    #[arg(long, value_delimiter = ',', default_value = "9,12,15,18")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    pub mode: ModeArg,
    /// Columns per ground-set element in random mode.
    #[arg(long, default_value_t = 10)]
    pub per_row: usize,
    /// Residual 2-norm at which both solvers stop.
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
}

impl NpbenchArgs {
    pub fn bench_mode(&self) -> BenchMode {
        match self.mode {
            ModeArg::All => BenchMode::AllTriples,
            ModeArg::Random => BenchMode::RandomP {
                per_row: self.per_row,
            },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct McCheckArgs {
    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 200_000)]
    pub draws: usize,
    /// Cutoffs of the check grid; each is paired with betas 0, 0.5, g, 2g, g + 5.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,4")]
    pub gammas: Vec<f64>,
    /// Largest accepted |MC - exact| in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub max_z: f64,
}

pub const MC_RULES: [ThresholdRule; 2] = [ThresholdRule::Hard, ThresholdRule::Soft];

#[derive(Debug, Args, Serialize)]
pub struct FromConfigArgs {
    /// JSON file with `command`, `parameters`, and optional `seed`, `output_dir`, `format`.
    pub path: PathBuf,
}

/// Contents of a config file. Unknown keys are rejected here, and unknown
/// parameter names are rejected when the parameters are parsed as flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub parameters: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    /// The equivalent command line, program name included.
    pub fn to_argv(&self) -> CliResult<Vec<String>> {
        if self.command == "from-config" {
            return Err(CliError::usage("a config file cannot run `from-config`"));
        }
        let mut argv = vec!["sparsity".to_string(), self.command.clone()];
        if let Some(seed) = self.seed {
            argv.extend(["--seed".into(), seed.to_string()]);
        }
        if let Some(dir) = &self.output_dir {
            argv.extend(["--output-dir".into(), dir.display().to_string()]);
        }
        if let Some(format) = self.format {
            argv.extend(["--format".into(), format.extension().into()]);
        }
        for (key, value) in &self.parameters {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                serde_json::Value::Null => {}
                serde_json::Value::Bool(true) => argv.push(flag),
                serde_json::Value::Bool(false) => {}
                serde_json::Value::Array(items) => {
                    let joined = items.iter().map(scalar_text).collect::<CliResult<Vec<_>>>()?;
                    argv.extend([flag, joined.join(",")]);
                }
                other => argv.extend([flag, scalar_text(other)?]),
            }
        }
        Ok(argv)
    }
}

fn scalar_text(v: &serde_json::Value) -> CliResult<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        _ => Err(CliError::usage(format!("unsupported parameter value {v}"))),
    }
}

/// Expands `start:stop:step` into an inclusive, evenly spaced grid.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::usage(format!("grid `{text}`: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(bad("expected start:stop:step"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if stop < start {
        return Err(bad("stop is below start"));
    }
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    let intervals = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor();
    if intervals >= MAX_GRID_POINTS as f64 {
        return Err(bad(&format!("more than {MAX_GRID_POINTS} points")));
    }
    Ok((0..=intervals as usize).map(|i| start + i as f64 * step).collect())
}

fn parse_stop(text: &str) -> Result<StopRule, String> {
    let rule = match text.split_once(':') {
        None if text == "full" => StopRule::FullPath,
        Some(("steps", n)) => StopRule::MaxSteps(n.parse().map_err(|_| format!("`{n}` is not a step count"))?),
        Some(("residual", e)) => StopRule::ResidualBelow(e.parse().map_err(|_| format!("`{e}` is not a number"))?),
        _ => return Err("expected `full`, `steps:N`, or `residual:EPS`".into()),
    };
    rule.validate().map_err(|e| e.to_string())?;
    Ok(rule)
}

fn serialize_stop<S: serde::Serializer>(rule: &StopRule, s: S) -> Result<S::Ok, S::Error> {
    match rule {
        StopRule::FullPath => s.serialize_str("full"),
        StopRule::MaxSteps(n) => s.collect_str(&format_args!("steps:{n}")),
        StopRule::ResidualBelow(e) => s.collect_str(&format_args!("residual:{e}")),
    }
}
