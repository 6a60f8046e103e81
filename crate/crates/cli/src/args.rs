use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gammabs::distfit::GammaParams;
use gammabs::pricing::OptionKind;
use gammabs::sdesim::SdeConfig;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "gammabs", version, about = "Gamma-smeared Black-Scholes pricing, volatility statistics and simulation")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Global {
    /// Seed for stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Annualized rates are divided by this.
    #[arg(long, global = true, default_value_t = 252.0)]
    pub trading_days_per_year: f64,
    /// Looked up for input files not found relative to the working directory.
    #[arg(long, global = true, env = "GAMMABS_CONFIG_DIR")]
    pub config_dir: Option<PathBuf>,
    /// Run all kernels on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Also write the effective configuration to this file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config_out: Option<PathBuf>,
    /// Do not echo the effective configuration on stderr.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Forward-window volatility from a `timestamp,price` CSV.
    EstimateVol(EstimateVolArgs),
    /// Gamma/Chi and reference fits of a volatility or variance series.
    FitDist(FitDistArgs),
    /// Price one European option.
    Price(PriceArgs),
    /// Daily re-hedged short-call backtest over a price series.
    HedgeBacktest(HedgeArgs),
    /// Euler-Maruyama ensemble of the variance or volatility diffusion.
    Simulate(SimulateArgs),
    /// Fit (δ, μ) to quoted option prices.
    Calibrate(CalibrateArgs),
    /// Characteristic times, cumulants and the measure density for a parameter set.
    Diagnose(DiagnoseArgs),
    /// Re-run a command from an effective-config file.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EstimateVolArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Window length n in samples.
    #[arg(long)]
    pub window: usize,
    /// Divide returns by their intraday-slot mean |R| first.
    #[arg(long, requires = "ntd")]
    pub normalize: bool,
    /// Number of trading days used for the normalization.
    #[arg(long)]
    pub ntd: Option<usize>,
    /// Samples per trading day.
    #[arg(long, default_value_t = 1)]
    pub day_length: usize,
    #[arg(long)]
    pub allow_gaps: bool,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Volatility,
    Variance,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FitDistArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SeriesKind::Volatility)]
    pub quantity: SeriesKind,
    /// Window length T of the input series; enables the scaled collapse.
    #[arg(long)]
    pub scale_collapse: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Collapse CSV (requires --scale-collapse).
    #[arg(long, requires = "scale_collapse")]
    pub collapse_out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Call,
    Put,
}

impl From<KindArg> for OptionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Call => OptionKind::Call,
            KindArg::Put => OptionKind::Put,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PriceArgs {
    #[arg(long)]
    pub spot: f64,
    #[arg(long)]
    pub strike: f64,
    /// Annualized continuously compounded rate.
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    /// Time to expiry in trading days.
    #[arg(long)]
    pub days: f64,
    /// Gamma rate μ of the daily variance law.
    #[arg(long)]
    pub mu: f64,
    /// Spread δ = 1/ν.
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Call)]
    pub kind: KindArg,
    /// Term cap of the series.
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Price by direct quadrature over the variance law.
    #[arg(long)]
    pub oracle: bool,
}

/// Parameter file: `mu` plus one of `delta` or `nu`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ParamsFile {
    pub fn params(&self) -> gammabs::Result<GammaParams> {
        match (self.delta, self.nu) {
            (Some(d), None) => GammaParams::from_mu_delta(self.mu, d),
            (None, Some(n)) => GammaParams::new(self.mu, n),
            _ => Err(gammabs::Error::Invalid("parameter file needs exactly one of `delta` and `nu` next to `mu`".into())),
        }
    }
}

/// Contract file for the backtest; expiry counted from the first sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractFile {
    pub strike: f64,
    pub expiry_days: f64,
    /// Annualized.
    pub rate: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct HedgeArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub contract: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub day_length: usize,
    #[arg(long)]
    pub allow_gaps: bool,
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
    /// Portfolio CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    pub resolved_contract: Option<ContractFile>,
    #[arg(skip)]
    #[serde(default)]
    pub resolved_params: Option<ParamsFile>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdeKind {
    Variance,
    Volatility,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub sde: SdeKind,
    /// SDE configuration JSON; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Binary dump of recorded paths (little-endian f64, path-major).
    #[arg(long)]
    pub paths_out: Option<PathBuf>,
    /// Histogram CSV of the terminal ensemble.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(skip)]
    #[serde(default)]
    pub resolved: Option<SdeConfig>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CalibrateArgs {
    /// Quotes CSV `date,spot,strike,expiry_date,observed_price,rate[,kind]`.
    #[arg(long)]
    pub quotes: PathBuf,
    #[arg(long)]
    pub init_mu: f64,
    #[arg(long)]
    pub init_delta: f64,
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Horizon of the measure density, trading days.
    #[arg(long, default_value_t = 20.0)]
    pub days: f64,
    /// Annualized rate for the measure drift.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    /// Density grid CSV.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default)]
    pub resolved: Option<ParamsFile>,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// Effective-config JSON written by an earlier run.
    pub config: PathBuf,
}

/// What every run echoes; enough to repeat it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Effective {
    pub global: Global,
    #[serde(flatten)]
    pub command: Command,
}
