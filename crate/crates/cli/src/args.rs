use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dynpanel",
    version,
    about = "Dynamic panel estimation, unit-root tests and Monte Carlo experiments"
)]
pub struct Cli {
    /// Output rendering.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Overrides every seed (configs, simulated nulls, moment tables).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for simulations and per-entity work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a dynamic panel regression.
    Estimate(EstimateArgs),
    /// Levin-Lin and IPS panel unit-root tests.
    Unitroot(UnitRootArgs),
    /// Residual-based panel cointegration test.
    Coint(CointArgs),
    /// Draw a panel from a DGP config and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo experiment config.
    Mc(McArgs),
    /// Regenerate the IPS moment table.
    Moments(MomentsArgs),
}

#[derive(Debug, Args)]
pub struct PanelInput {
    /// Panel CSV in long format: one row per (entity, time).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "entity")]
    pub entity_col: String,
    #[arg(long, default_value = "time")]
    pub time_col: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ols,
    Within,
    AhDiff,
    AhLevel,
    Ab1,
    Ab2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Fd,
    Fod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum XIvArg {
    Differenced,
    Strict,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub panel: PanelInput,
    #[arg(long)]
    pub dep: String,
    /// Comma-separated exogenous regressors.
    #[arg(long, value_delimiter = ',')]
    pub exog: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub lags: usize,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Effects-removing transform for GMM.
    #[arg(long, value_enum, default_value_t = TransformArg::Fd)]
    pub transform: TransformArg,
    /// Instrument policy for exogenous regressors in GMM.
    #[arg(long, value_enum, default_value_t = XIvArg::Differenced)]
    pub x_iv: XIvArg,
    /// Deepest lag of the dependent variable used as a GMM instrument.
    #[arg(long)]
    pub max_lag_depth: Option<usize>,
    /// Drop the intercept from pooled OLS.
    #[arg(long)]
    pub no_intercept: bool,
    /// Regressor whose sign is read as complementarity or substitution.
    #[arg(long, default_value = "G")]
    pub public_var: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UrTest {
    Ll,
    Ips,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeterministicArg {
    None,
    Intercept,
    Trend,
}

#[derive(Debug, Args)]
pub struct AdfArgs {
    #[arg(long, value_enum, default_value_t = DeterministicArg::Intercept)]
    pub deterministic: DeterministicArg,
    /// Augmentation lags: a number or `auto` (AIC).
    #[arg(long, default_value = "0")]
    pub lags: String,
    /// Moment table CSV; the bundled table is used otherwise.
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UnitRootArgs {
    #[command(flatten)]
    pub panel: PanelInput,
    /// Comma-separated variables, one table column each.
    #[arg(long, value_delimiter = ',', required = true)]
    pub vars: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [UrTest::Ll, UrTest::Ips])]
    pub tests: Vec<UrTest>,
    #[command(flatten)]
    pub adf: AdfArgs,
    /// Replications of the simulated Levin-Lin null.
    #[arg(long, default_value_t = 2000)]
    pub ll_replications: usize,
}

#[derive(Debug, Args)]
pub struct CointArgs {
    #[command(flatten)]
    pub panel: PanelInput,
    #[arg(long)]
    pub dep: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub exog: Vec<String>,
    #[arg(long, value_enum, default_value_t = DeterministicArg::None)]
    pub deterministic: DeterministicArg,
    #[arg(long, default_value = "0")]
    pub lags: String,
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// DGP config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Where to write the full report (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 50_000)]
    pub replications: usize,
    /// Series lengths; the full bundled grid when omitted.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<usize>,
    /// Restrict to one deterministic specification (raw series only).
    #[arg(long, value_enum)]
    pub deterministic: Option<DeterministicArg>,
}
