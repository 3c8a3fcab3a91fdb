//! `crosslab` — command-line front end for the crossing-flow toolkit.
//!
//! Wires the library pipeline end to end: CSV ingestion, derived monthly
//! series, the two-step error-correction fit, the boat-size choice model
//! with counterfactuals, stability scans, backtests, t-test contrasts, and
//! synthetic-data generation. Outputs land in one directory with fixed
//! names; every byte written is deterministic given inputs and flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crosslab_core::dataset::Route;
use crosslab_core::econ::{DepVariable, EcmSpec};
use crosslab_core::{Month, MonthRange};

mod commands;
mod svg;
mod table;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "crosslab",
    version,
    about = "Sea-crossing flow series, error-correction fits, and boat-size choice models"
)]
pub struct Cli {
    /// Monthly flow CSV (route,month,n_rescued,n_intercepted,n_dead).
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Incident-level CSV (incident_id,date,departure_country,boat_type,...).
    #[arg(long, global = true, value_name = "FILE")]
    pub incidents: Option<PathBuf>,

    /// Output directory; defaults to $CROSSLAB_OUT, then ./out.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Comma-separated output formats.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_value = "csv,json",
        value_name = "FMT[,FMT]"
    )]
    pub format: Vec<Format>,

    /// RNG seed; required by `synth`, ignored elsewhere.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the derived monthly series per route (and the quarterly
    /// interception table when incidents are supplied).
    Derive(DeriveArgs),
    /// Fit the two-step error-correction model and print the fit table.
    Ecm(EcmArgs),
    /// Fit the boat-size choice model; report crossovers, predicted
    /// quarterly shares, and counterfactual shifts.
    Choice(ChoiceArgs),
    /// Split the sample at a month, fit on the left side, and compare
    /// one-step-ahead predictions against a carry-forward baseline.
    Backtest(BacktestArgs),
    /// Re-estimate the adjustment speed on expanding windows.
    Window(WindowArgs),
    /// Welch two-sample t-tests of incident characteristics between two
    /// date windows.
    Ttest(TtestArgs),
    /// Generate synthetic datasets from a known data-generating process.
    Synth(SynthArgs),
    /// Quarterly coverage of incident person-counts against flow arrivals.
    Coverage(CoverageArgs),
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|()| format!("unknown route {s:?} (expected central, western, or eastern)"))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DepArg {
    /// Crossings in thousands.
    Level,
    /// ln(crossings in thousands).
    Log,
    /// ln(N / (M - N)) against the route cap.
    LogOdds,
}

impl From<DepArg> for DepVariable {
    fn from(d: DepArg) -> Self {
        match d {
            DepArg::Level => DepVariable::Level,
            DepArg::Log => DepVariable::Log,
            DepArg::LogOdds => DepVariable::LogOdds,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    /// Unit weights.
    None,
    /// 1 / (1 - p_interception).
    Rescue,
    /// 1 / (incidents in the quarter).
    Frequency,
}

impl From<WeightingArg> for crosslab_core::choice::Weighting {
    fn from(w: WeightingArg) -> Self {
        use crosslab_core::choice::Weighting;
        match w {
            WeightingArg::None => Weighting::None,
            WeightingArg::Rescue => Weighting::InverseRescue,
            WeightingArg::Frequency => Weighting::Frequency,
        }
    }
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Route whose series feeds the quarter table.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
    /// Fixed potential-population cap in thousands; default is 10/9 of the
    /// observed maximum.
    #[arg(long, value_name = "THOUSANDS")]
    pub cap: Option<f64>,
    /// LOWESS bandwidth for the smoothed rescue-probability chart.
    #[arg(long, default_value_t = 0.35)]
    pub bandwidth: f64,
}

#[derive(Debug, Args)]
pub struct EcmArgs {
    /// Dependent route.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
    /// Route supplying the rescue probability.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub rescue_route: Route,
    /// Dependent-variable transform.
    #[arg(long, value_enum, default_value_t = DepArg::Level)]
    pub dep: DepArg,
    /// Include the lagged rescue-probability change.
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub short_run: bool,
    /// Include the lagged dependent-variable change.
    #[arg(long, default_value_t = false, action = ArgAction::Set, value_name = "BOOL")]
    pub lagged_dep: bool,
    /// Fit all nine specifications (3 transforms x 3 regressor sets).
    #[arg(long)]
    pub all_specs: bool,
}

impl EcmArgs {
    pub fn spec(&self) -> EcmSpec {
        EcmSpec {
            dep: self.dep.into(),
            include_short_run: self.short_run,
            include_lagged_dep: self.lagged_dep,
        }
    }
}

#[derive(Debug, Args)]
pub struct ChoiceArgs {
    /// Route whose flow series anchors the quarterly interception table.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
    /// Month window the estimation sample is restricted to.
    #[arg(long, default_value = "2016-01:2019-12", value_parser = parse_month_range)]
    pub window: MonthRange,
    /// Observation weighting scheme.
    #[arg(long, value_enum, default_value_t = WeightingArg::Frequency)]
    pub weighting: WeightingArg,
    /// Fit the six-column grid: intercepts-only and full model under each
    /// weighting scheme.
    #[arg(long)]
    pub all_weightings: bool,
    /// Counterfactual shift of the interception probability, in
    /// percentage points.
    #[arg(long, value_name = "PP", allow_hyphen_values = true)]
    pub delta_pp: Option<f64>,
}

fn parse_month(s: &str) -> Result<Month, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_month_range(s: &str) -> Result<MonthRange, String> {
    s.parse().map_err(|e| format!("{e} (expected YYYY-MM:YYYY-MM)"))
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    /// Dependent route.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
    /// Route supplying the rescue probability.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub rescue_route: Route,
    /// Dependent-variable transform.
    #[arg(long, value_enum, default_value_t = DepArg::Level)]
    pub dep: DepArg,
    /// Last month of the training window.
    #[arg(long, required = true, value_parser = parse_month, value_name = "YYYY-MM")]
    pub split: Month,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Dependent route.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
    /// Route supplying the rescue probability.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub rescue_route: Route,
    /// Dependent-variable transform.
    #[arg(long, value_enum, default_value_t = DepArg::Level)]
    pub dep: DepArg,
    /// Months in the first window.
    #[arg(long, default_value_t = 24)]
    pub start_len: usize,
}

#[derive(Debug, Args)]
pub struct TtestArgs {
    /// First comparison window.
    #[arg(long, required = true, value_parser = parse_month_range, value_name = "YYYY-MM:YYYY-MM")]
    pub phase2: MonthRange,
    /// Second comparison window.
    #[arg(long, required = true, value_parser = parse_month_range, value_name = "YYYY-MM:YYYY-MM")]
    pub phase3: MonthRange,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SynthMode {
    /// Generate a monthly flow CSV from the error-correction process.
    #[arg(long)]
    pub ecm: bool,
    /// Generate incident and flow CSVs from the choice process.
    #[arg(long)]
    pub choice: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub mode: SynthMode,
    /// Route label stamped on generated flow rows.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,

    // -- error-correction process --
    /// Months to generate.
    #[arg(long, default_value_t = 120)]
    pub length: usize,
    /// Equilibrium intercept (thousands). Keep `beta0 + beta1 * p` well
    /// above zero over the walk's range or the flow rounding will fail.
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub beta0: f64,
    /// Equilibrium slope on the rescue probability.
    #[arg(long, default_value_t = 28.0, allow_hyphen_values = true)]
    pub beta1: f64,
    /// Short-run drift.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha0: f64,
    /// Adjustment speed; must lie in (-2, 0).
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    pub alpha1: f64,
    /// Loading on the lagged rescue-probability change.
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub alpha2: f64,
    /// Standard deviation of the monthly innovation (thousands).
    #[arg(long, default_value_t = 0.25)]
    pub noise_sd: f64,
    /// Rescue-probability random walk: starting level.
    #[arg(long, default_value_t = 0.1)]
    pub walk_start: f64,
    /// Rescue-probability random walk: per-month drift.
    #[arg(long, default_value_t = 0.00145, allow_hyphen_values = true)]
    pub walk_drift: f64,
    /// Rescue-probability random walk: step standard deviation.
    #[arg(long, default_value_t = 0.005)]
    pub walk_sd: f64,

    // -- choice process --
    /// Utility intercepts for the mid and large bins.
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub alpha_mid: f64,
    #[arg(long, default_value_t = 3.5, allow_hyphen_values = true)]
    pub alpha_large: f64,
    /// Interception-probability slopes for the mid and large bins.
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub beta_mid: f64,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub beta_large: f64,
    /// Number of quarters, starting at 2016Q1.
    #[arg(long, default_value_t = 8)]
    pub quarters: u32,
    /// Incidents per quarter.
    #[arg(long, default_value_t = 60)]
    pub per_quarter: u32,
    /// Interception probability in the first and last quarter; the path
    /// between them is linear.
    #[arg(long, default_value_t = 0.10)]
    pub p_start: f64,
    #[arg(long, default_value_t = 0.80)]
    pub p_end: f64,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Route whose arrivals anchor the denominator.
    #[arg(long, default_value = "central", value_parser = parse_route)]
    pub route: Route,
}
