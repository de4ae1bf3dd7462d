use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use unpin_core::kernels::Perturbation;
use unpin_core::{KernelSpec, Nonlinearity};
use unpin_fitting::{Method as ScanMethod, WindowPolicy};

fn display<S: Serializer, T: fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn display_opt<S: Serializer, T: fmt::Display>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

fn window_str<S: Serializer>(w: &WindowPolicy, s: S) -> Result<S::Ok, S::Error> {
    match w {
        WindowPolicy::All => s.serialize_str("all"),
        WindowPolicy::Ranks { first, last } => s.collect_str(&format_args!("{first}:{last}")),
    }
}

/// `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected lo:hi:n, got '{s}'");
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else { return Err(bad()) };
        let (lo, hi): (f64, f64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite()) || hi < lo || n == 0 {
            return Err(format!("range needs finite lo ≤ hi and n ≥ 1, got '{s}'"));
        }
        Ok(Self { lo, hi, n })
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl RangeSpec {
    pub fn linear(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|k| if k + 1 == self.n { self.hi } else { self.lo + h * k as f64 }).collect()
    }
}

/// `L:n`: half-length and number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_length: f64,
    pub n: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected L:n, got '{s}'");
        let (l, n) = s.split_once(':').ok_or_else(bad)?;
        let half_length: f64 = l.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if !(half_length > 0.0 && half_length.is_finite()) || n < 16 {
            return Err(format!("grid needs L > 0 and n ≥ 16, got '{s}'"));
        }
        Ok(Self { half_length, n })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.half_length, self.n)
    }
}

fn kernel(s: &str) -> Result<KernelSpec, String> {
    s.parse().map_err(|e: unpin_core::Error| e.to_string())
}

fn window(s: &str) -> Result<WindowPolicy, String> {
    s.parse().map_err(|e: unpin_core::Error| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NlKind {
    Cubic,
    Pwl,
}

impl NlKind {
    pub fn build(self, a: f64) -> Nonlinearity<f64> {
        match self {
            NlKind::Cubic => Nonlinearity::cubic(a),
            NlKind::Pwl => Nonlinearity::piecewise_linear(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFamily {
    Cubic,
    Pwl,
    /// Cubic reaction with the one-sided kernel.
    Onesided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveMethod {
    Newton,
    Shoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Sim,
    Newton,
    Shoot,
}

impl From<MethodArg> for ScanMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sim => ScanMethod::Sim,
            MethodArg::Newton => ScanMethod::Newton,
            MethodArg::Shoot => ScanMethod::Shoot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationArg {
    None,
    Bump,
    Gauss,
}

impl From<PerturbationArg> for Perturbation {
    fn from(p: PerturbationArg) -> Self {
        match p {
            PerturbationArg::None => Perturbation::None,
            PerturbationArg::Bump => Perturbation::AddBump,
            PerturbationArg::Gauss => Perturbation::AverageGauss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Table1,
    Table2,
    Fig7,
    Fig8,
}

#[derive(Debug, Parser)]
#[command(name = "unpin", version, about = "Pinning regions and unpinning speeds of nonlocal bistable fronts")]
pub struct Cli {
    /// Directory receiving every artifact and its metadata.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Pinning boundaries a_∓(d) on a grid of couplings.
    Pinning(PinningArgs),
    /// Universal constants and predicted prefactors.
    Constants(ConstantsArgs),
    /// One travelling wave.
    Wave(WaveArgs),
    /// One direct simulation with front tracking.
    Simulate(SimulateArgs),
    /// Speeds at a = a_b − μ over a geometric μ-grid.
    Scan(ScanArgs),
    /// Power-law fit of a scan CSV.
    Fit(FitArgs),
    /// Exponent γ(β) for the (1 + ℓ²)^(−β/2) kernels.
    BetaScan(BetaScanArgs),
    /// Named parameter sets behind the published tables and figures.
    Repro(ReproArgs),
    /// Execute a JSON run configuration.
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pinning(_) => "pinning",
            Command::Constants(_) => "constants",
            Command::Wave(_) => "wave",
            Command::Simulate(_) => "simulate",
            Command::Scan(_) => "scan",
            Command::Fit(_) => "fit",
            Command::BetaScan(_) => "beta-scan",
            Command::Repro(_) => "repro",
            Command::Run(_) => "run",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PinningArgs {
    #[arg(long, value_enum, default_value = "cubic")]
    pub nonlinearity: BoundaryFamily,
    #[arg(long, default_value = "0.01:0.25:25")]
    #[serde(serialize_with = "display")]
    pub d_range: RangeSpec,
    /// Solve the area-balance condition instead of using closed forms.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    pub d: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct WaveArgs {
    #[arg(long, value_parser = kernel)]
    #[serde(serialize_with = "display")]
    pub kernel: KernelSpec,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, value_parser = positive)]
    pub d: f64,
    #[arg(long, value_enum, default_value = "newton")]
    pub method: WaveMethod,
    #[arg(long, value_enum, default_value = "cubic")]
    pub nonlinearity: NlKind,
    #[arg(long)]
    #[serde(serialize_with = "display_opt")]
    pub grid: Option<GridSpec>,
    /// Initial speed guess for Newton.
    #[arg(long, default_value_t = 0.01)]
    pub c_guess: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = kernel)]
    #[serde(serialize_with = "display")]
    pub kernel: KernelSpec,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long)]
    pub d: f64,
    #[arg(long, default_value_t = 0.17, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value = "30:8192")]
    #[serde(serialize_with = "display")]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 1000.0, value_parser = positive)]
    pub tend: f64,
    #[arg(long, value_enum, default_value = "cubic")]
    pub nonlinearity: NlKind,
    /// Fraction of the track discarded as transient.
    #[arg(long, default_value_t = 0.3)]
    pub discard: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, value_parser = kernel)]
    #[serde(serialize_with = "display")]
    pub kernel: KernelSpec,
    #[arg(long, value_parser = positive)]
    pub d: f64,
    #[arg(long)]
    #[serde(serialize_with = "display")]
    pub mu_grid: RangeSpec,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "cubic")]
    pub nonlinearity: NlKind,
    /// Simulation grid (sim) or domain and spectral size (newton).
    #[arg(long)]
    #[serde(serialize_with = "display_opt")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "4:8", value_parser = window)]
    #[serde(serialize_with = "window_str")]
    pub window: WindowPolicy,
    /// Drop rows without a positive speed before ranking.
    #[arg(long)]
    pub moving_only: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BetaScanArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.5,2,3", value_parser = positive)]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    pub d: f64,
    #[arg(long, default_value = "2e-3:2e-1:16")]
    #[serde(serialize_with = "display")]
    pub mu_grid: RangeSpec,
    #[arg(long, value_enum, default_value = "sim")]
    pub method: MethodArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "none")]
    pub perturbations: Vec<PerturbationArg>,
    #[arg(long, default_value = "4:8", value_parser = window)]
    #[serde(serialize_with = "window_str")]
    pub window: WindowPolicy,
    /// Also bracket the onset of motion in a by simulation.
    #[arg(long)]
    pub check_boundary: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub preset: Preset,
    /// Coarser grids for a fast look.
    #[arg(long)]
    pub quick: bool,
    /// table1: also measure k_m, s_m by continuation and simulation.
    #[arg(long)]
    pub measure: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    pub config: PathBuf,
}
