//! Command-line grammar.

use std::path::PathBuf;

use bbs_tba::Capacity;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "bbs",
    version,
    about = "Box-ball system: simulation, exact hydrodynamics and Monte Carlo checks",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo subcommands (0 = all cores).
    #[arg(long, global = true, env = "BBS_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Plain-text `key = value` file supplying default flags; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Json,
}

/// Carrier capacity: a positive integer or `inf`.
pub fn parse_capacity(s: &str) -> Result<Capacity, String> {
    match s.trim() {
        "inf" | "infinity" | "oo" => Ok(Capacity::Infinite),
        t => match t.parse::<u32>() {
            Ok(0) => Err("capacity must be at least 1".into()),
            Ok(l) => Ok(Capacity::Finite(l)),
            Err(_) => Err(format!("`{t}` is neither a positive integer nor `inf`")),
        },
    }
}

fn parse_finite_capacity(s: &str) -> Result<u32, String> {
    match parse_capacity(s)? {
        Capacity::Finite(l) => Ok(l),
        Capacity::Infinite => Err("this subcommand needs a finite capacity".into()),
    }
}

/// Current label: a positive integer, or `inf` for the unbounded current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Size(u32),
    Unbounded,
}

fn parse_label(s: &str) -> Result<Label, String> {
    Ok(match parse_capacity(s)? {
        Capacity::Finite(k) => Label::Size(k),
        Capacity::Infinite => Label::Unbounded,
    })
}

fn cap_serialize<S: serde::Serializer>(c: &Capacity, s: S) -> Result<S::Ok, S::Error> {
    match c {
        Capacity::Finite(l) => s.serialize_u32(*l),
        Capacity::Infinite => s.serialize_str("inf"),
    }
}

/// Stationary state: a product state (`--density` or `--fugacity`) or the
/// two-temperature state (`--beta1` with `--beta-inf`).
#[derive(Debug, Clone, Args, Serialize)]
pub struct StateArgs {
    /// Ball density p of the product state, 0 <= p < 1/2.
    #[arg(long, conflicts_with_all = ["fugacity", "beta1", "beta_inf"])]
    pub density: Option<f64>,
    /// Fugacity z = p/(1-p) of the product state.
    #[arg(long, conflicts_with_all = ["beta1", "beta_inf"])]
    pub fugacity: Option<f64>,
    /// Inverse temperature conjugate to the soliton number E_1.
    #[arg(long, requires = "beta_inf", allow_hyphen_values = true)]
    pub beta1: Option<f64>,
    /// Inverse temperature conjugate to the ball number.
    #[arg(long, requires = "beta1", allow_hyphen_values = true)]
    pub beta_inf: Option<f64>,
}

/// Ring and sampling parameters shared by the Monte Carlo subcommands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplingArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Number of sites L of the periodic ring.
    #[arg(long)]
    pub length: usize,
    /// Number of independent rings.
    #[arg(long)]
    pub samples: u64,
    /// Master seed; sample k is drawn from a seed derived from (seed, k).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Accept rings shorter than the no-wrap bound 2 * 1.2 * v_max * t.
    #[arg(long)]
    pub allow_wrap: bool,
    /// Rings allowed to hit an ambiguous half-filled carrier before the run
    /// fails (default: 1% of the samples).
    #[arg(long)]
    pub skip_budget: Option<u64>,
}

/// Explicit configuration or a random one from a stationary state.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ConfigSource {
    /// Configuration as a string of 0s and 1s, site 0 first.
    #[arg(long, conflicts_with_all = ["length", "density", "fugacity", "beta1", "beta_inf"])]
    pub state: Option<String>,
    /// Ring length for a random configuration.
    #[arg(long)]
    pub length: Option<usize>,
    #[command(flatten)]
    pub ensemble: StateArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Apply T_l repeatedly and print each configuration with the carrier
    /// load entering every site (balls, integers in 0..=l).
    Evolve {
        #[command(flatten)]
        source: ConfigSource,
        /// Carrier capacity l.
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        /// Number of time steps.
        #[arg(long, default_value_t = 1)]
        steps: u64,
    },
    /// Conserved energies E_k (pickups of a capacity-k carrier), soliton
    /// multiplicities m_k and pseudoenergies eps_k of one configuration.
    Energies {
        #[command(flatten)]
        source: ConfigSource,
        /// Largest k; by default until the spectrum saturates.
        #[arg(long)]
        max_k: Option<u32>,
    },
    /// Thermodynamic profile per soliton size k: densities rho_k, hole
    /// densities sigma_k, filling ratios y_k and effective velocities
    /// v^{(l)}_k (sites per time step).
    Tba {
        #[command(flatten)]
        state: StateArgs,
        /// Carrier capacity l for the velocities.
        #[arg(long, value_parser = parse_capacity, default_value = "inf")]
        #[serde(serialize_with = "cap_serialize")]
        capacity: Capacity,
        /// Largest soliton size K.
        #[arg(long, default_value_t = 30)]
        truncation: usize,
    },
    /// Drude weight D^{(l)} of the ball current (balls^2 per site per step),
    /// with the mean current, second scaled cumulant c_2 and, for product
    /// states, the equal-time variance f of the integrated current.
    Drude {
        #[command(flatten)]
        state: StateArgs,
        /// Carrier capacity l of the dynamics.
        #[arg(long, value_parser = parse_capacity)]
        #[serde(serialize_with = "cap_serialize")]
        capacity: Capacity,
    },
    /// Time-integrated current correlation C^{l,m}_{i,j} between the
    /// generalized currents (l, i) and (m, j); `inf` selects the unbounded
    /// current. With --matrix, the K x K block over i, j <= K.
    Correlations {
        #[command(flatten)]
        state: StateArgs,
        /// Capacity l of the first current.
        #[arg(long, value_parser = parse_capacity)]
        #[serde(serialize_with = "cap_serialize")]
        capacity: Capacity,
        /// Capacity m of the second current.
        #[arg(long, value_parser = parse_capacity)]
        #[serde(serialize_with = "cap_serialize")]
        m: Capacity,
        #[arg(long, value_parser = parse_capacity, default_value = "inf")]
        #[serde(serialize_with = "cap_serialize")]
        i: Capacity,
        #[arg(long, value_parser = parse_capacity, default_value = "inf")]
        #[serde(serialize_with = "cap_serialize")]
        j: Capacity,
        #[arg(long)]
        matrix: bool,
        /// Matrix size K for --matrix.
        #[arg(long, default_value_t = 20)]
        truncation: usize,
    },
    /// Flux Jacobian A^{(l)} = d(current)/d(density) over soliton sizes
    /// 1..=K, as (row, column, value) triples.
    FluxJacobian {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        #[arg(long, default_value_t = 20)]
        truncation: usize,
    },
    /// Large deviations of N_t, the balls crossing a bond in t steps of T_l,
    /// in a product state: rate function G(j) with its conjugate field on a
    /// `j=a:b:step` grid, or the scaled cumulant generating function F and
    /// its first two derivatives on a `lambda=a:b:step` grid.
    Ldf {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_parser = parse_capacity)]
        #[serde(serialize_with = "cap_serialize")]
        capacity: Capacity,
        /// `j=a:b:step` (balls per step) or `lambda=a:b:step`.
        #[arg(long)]
        grid: String,
    },
    /// Joint large deviations of the ball and soliton transfer in the
    /// two-temperature state: F(lambda, mu) with its gradient on a `lambda=`
    /// or `mu=` grid, or (capacity inf) the joint rate on a `j=` grid at
    /// fixed --soliton or an `s=` grid at fixed --ball.
    Ldf2t {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_parser = parse_capacity)]
        #[serde(serialize_with = "cap_serialize")]
        capacity: Capacity,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        /// Soliton current (solitons per step) held fixed on a `j=` grid.
        #[arg(long)]
        soliton: Option<f64>,
        /// Ball current held fixed on an `s=` grid.
        #[arg(long)]
        ball: Option<f64>,
    },
    /// Carrier transfer matrix L^z(y) of a product state: leading eigenvalue
    /// and log-derivatives, the equal-time variance f of the integrated
    /// current (balls^2 per site) with its closed-form fit, c_2 and the
    /// stationary current. With --matrix, the entries of L^z(y).
    TransferMatrix {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        #[arg(long)]
        matrix: bool,
    },
    /// Monte Carlo scaled cumulants <N_t^k>^c / t, k = 1..4, of the balls
    /// crossing the bond into site 0 during t steps of T_l.
    MeasureCumulants {
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        /// Time horizon t in steps.
        #[arg(long)]
        time: u64,
    },
    /// Monte Carlo histogram (N, count) of N_t. --theory writes
    /// (N, exp(-t G(N/t)), Gaussian) normalized over 0..=l t.
    MeasureHistogram {
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        #[arg(long)]
        time: u64,
        #[arg(long)]
        theory: Option<PathBuf>,
    },
    /// Monte Carlo sum_x <eta^{(m)}_i(x, t) eta^{(l)}_j(0, 0)>^c with time
    /// evolution by T_n; labels at or above --inf-proxy (or `inf`) use the
    /// unbounded current.
    MeasureCorrelation {
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Capacity l of the current at time 0.
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        /// Capacity m of the current at time t (default l).
        #[arg(long, value_parser = parse_finite_capacity)]
        m: Option<u32>,
        #[arg(long, value_parser = parse_label, default_value = "inf")]
        i: Label,
        #[arg(long, value_parser = parse_label, default_value = "inf")]
        j: Label,
        /// Capacity n of the dynamics (default l).
        #[arg(long, value_parser = parse_finite_capacity)]
        dyn_capacity: Option<u32>,
        #[arg(long)]
        time: u64,
        #[arg(long, default_value_t = bbs_measure::plan::DEFAULT_INF_PROXY)]
        inf_proxy: u32,
    },
    /// Monte Carlo L cov(eps_i, eps_j) of the pseudoenergies, with the
    /// predicted diagonal; off-diagonal entries are expected to vanish.
    MeasurePseudoenergy {
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 5)]
        i_max: usize,
    },
    /// Monte Carlo check of sum_x f(x) <dn(x) dn(0)>^c against
    /// sum_x (2f(x) - f(x+1) - f(x-1)) <J_x J_0>^c, where dn is the density
    /// change over t steps of T_l and J_x the balls carried into site x.
    SumRuleCheck {
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_parser = parse_finite_capacity)]
        capacity: u32,
        #[arg(long)]
        time: u64,
        #[arg(long, value_enum, default_value_t = WeightArg::Abs)]
        weight: WeightArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum WeightArg {
    /// f(x) = |x|
    Abs,
    /// f(x) = x^2
    Square,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evolve { .. } => "evolve",
            Command::Energies { .. } => "energies",
            Command::Tba { .. } => "tba",
            Command::Drude { .. } => "drude",
            Command::Correlations { .. } => "correlations",
            Command::FluxJacobian { .. } => "flux-jacobian",
            Command::Ldf { .. } => "ldf",
            Command::Ldf2t { .. } => "ldf2t",
            Command::TransferMatrix { .. } => "transfer-matrix",
            Command::MeasureCumulants { .. } => "measure-cumulants",
            Command::MeasureHistogram { .. } => "measure-histogram",
            Command::MeasureCorrelation { .. } => "measure-correlation",
            Command::MeasurePseudoenergy { .. } => "measure-pseudoenergy",
            Command::SumRuleCheck { .. } => "sum-rule-check",
        }
    }
}

pub const SUBCOMMANDS: [&str; 14] = [
    "evolve",
    "energies",
    "tba",
    "drude",
    "correlations",
    "flux-jacobian",
    "ldf",
    "ldf2t",
    "transfer-matrix",
    "measure-cumulants",
    "measure-histogram",
    "measure-correlation",
    "measure-pseudoenergy",
    "sum-rule-check",
];
