use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirichlet_core::DivisorConvention;
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "DIRICHLET_DP_SEED";

#[derive(Debug, Parser)]
#[command(name = "dirichlet-dp", version, about = "Privacy accounting and simulation for the Dirichlet mechanism")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute epsilon and delta for a query, optionally auditing them by sampling.
    Audit(AuditArgs),
    /// Epsilon as a function of delta: calibrate gamma at each delta, then evaluate both epsilon forms.
    Curves(CurvesArgs),
    /// Draw outputs of the mechanism for one input.
    Sample(SampleArgs),
    /// Run the average-query experiment on a collection.
    Simulate(SimulateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryArg {
    Identity,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum DivisorArg {
    /// Collection size.
    #[value(name = "N")]
    N,
    /// Vector dimension.
    #[value(name = "n")]
    #[serde(rename = "n")]
    Dim,
}

impl From<DivisorArg> for DivisorConvention {
    fn from(d: DivisorArg) -> Self {
        match d {
            DivisorArg::N => DivisorConvention::CollectionSize,
            DivisorArg::Dim => DivisorConvention::Dimension,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Directory for artifacts and the run manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AuditArgs {
    /// Vector dimension.
    #[arg(long)]
    pub n: usize,
    /// 0-based indices of W, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub w_indices: Vec<usize>,
    /// Lower bound on each W entry of an input.
    #[arg(long)]
    pub eta: f64,
    /// Lower bound on the mass outside W.
    #[arg(long)]
    pub eta_bar: f64,
    /// Adjacency radius in (0, 1].
    #[arg(long)]
    pub b: f64,
    /// Concentration parameter.
    #[arg(long)]
    pub k: f64,
    #[arg(long, value_enum, default_value = "identity")]
    pub query: QueryArg,
    /// Collection size for average queries.
    #[arg(long = "N")]
    pub collection_size: Option<usize>,
    /// Target delta; gamma is calibrated to it.
    #[arg(long, conflicts_with = "gamma", required_unless_present = "gamma")]
    pub delta_hat: Option<f64>,
    /// Explicit partition threshold.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "N")]
    pub divisor: DivisorArg,
    /// Also sample the mechanism and check the reported parameters.
    #[arg(long)]
    pub empirical: bool,
    #[arg(long, default_value_t = 100_000, value_parser = parse_count)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// Input to audit (comma separated); a random adjacent pair is drawn when omitted.
    #[arg(long, value_delimiter = ',', requires = "q")]
    pub p: Option<Vec<f64>>,
    /// Neighbouring input to audit.
    #[arg(long, value_delimiter = ',', requires = "p")]
    pub q: Option<Vec<f64>>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CurvesArgs {
    /// Lower bound on each W entry of an input.
    #[arg(long)]
    pub eta: f64,
    /// Lower bound on the mass outside W.
    #[arg(long)]
    pub eta_bar: f64,
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub w_size: usize,
    /// Grid of target deltas as start:stop:step (stop included).
    #[arg(long, default_value = "0.01:0.105:0.005")]
    pub delta_grid: DeltaGrid,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Input vector, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long)]
    pub k: f64,
    #[arg(long, value_parser = parse_count)]
    pub count: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 24.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1000, value_parser = parse_count)]
    pub runs: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Collection CSV; the shipped collection is used when omitted.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Expected SHA-256 of the collection file.
    #[arg(long)]
    pub fixture_sha256: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Inclusive grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DeltaGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl FromStr for DeltaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        let grid = DeltaGrid {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        if !(grid.step > 0.0 && grid.start > 0.0 && grid.stop >= grid.start && grid.stop < 1.0) {
            return Err(format!("grid `{s}` must satisfy 0 < start <= stop < 1 and step > 0"));
        }
        Ok(grid)
    }
}

impl fmt::Display for DeltaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Accepts integers and integral values in float notation such as `1e5`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("`{s}` is not a whole number"))
    }
}
