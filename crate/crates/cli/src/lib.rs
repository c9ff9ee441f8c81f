//! Command-line front end: argument parsing, configuration, cached branch
//! solves, file output and the acceptance runner.

pub mod cache;
mod commands;
pub mod config;
pub mod error;
pub mod io;
mod plot;
pub mod validate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
pub use crate::error::{exit, CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "gpvortex", version, about = "Spectral toolkit for the linearized vortex on the hyperbolic plane")]
pub struct Cli {
    /// TOML run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Branch cache directory. Falls back to $GPVORTEX_CACHE, then the config.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Vortex profile ρ, ρ' on a uniform grid (CSV: r, rho, rho_prime).
    Profile(ProfileArgs),
    /// Labeled dispersion roots at λ ± i0 or λ + i·im (JSON lines).
    Roots(RootsArgs),
    /// One solution branch sampled on a grid (CSV).
    Jost(JostArgs),
    /// Connection data over a λ sweep, both signs (JSON lines).
    Connect(ConnectArgs),
    /// Distorted Fourier coefficients of a field (CSV).
    Transform(TransformArgs),
    /// e^{tL} applied to a field (CSV: t, r, phi_re, phi_im, psi_re, psi_im).
    Evolve(EvolveArgs),
    /// Run acceptance criteria and print one line per criterion.
    Validate(ValidateArgs),
    /// SVG figure from a file written by another subcommand.
    Plot(PlotArgs),
    /// Write the effective configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Args, Debug)]
pub struct PotentialArgs {
    /// Profile CSV written by `profile`.
    #[arg(long, conflicts_with = "free")]
    pub profile: Option<PathBuf>,
    /// Use V ≡ 0.
    #[arg(long)]
    pub free: bool,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LimitArg {
    Plus,
    Minus,
}

#[derive(Args, Debug)]
pub struct RootsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// End of a linear sweep starting at --lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_end: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Imaginary part; zero selects the boundary value.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub im: f64,
    #[arg(long, value_enum, default_value_t = LimitArg::Plus)]
    pub limit: LimitArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct JostArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub im: f64,
    /// phi1..phi4 or psi1, psi2.
    #[arg(long)]
    pub label: String,
    #[arg(long, default_value_t = 0.01)]
    pub r_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub nodes: usize,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConnectArgs {
    #[arg(long, default_value_t = gpvortex::THRESHOLD + 1e-3)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Field CSV with columns r, phi_re, phi_im, psi_re, psi_im.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Nodes per sign of λ.
    #[arg(long)]
    pub lambda_nodes: Option<usize>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write |Θ| samples for a heatmap.
    #[arg(long)]
    pub theta_out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub theta_stride: usize,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Comma-separated times.
    #[arg(long = "t", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub times: Vec<f64>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub lambda_nodes: Option<usize>,
    /// Compare with the finite-difference time stepper on the input grid.
    #[arg(long)]
    pub compare_oracle: bool,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// profile, dispersion, connection, transform, evolution, spectrum, resolvent, lap or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<u8>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("gpvortex: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(cache::CACHE_ENV).map(PathBuf::from))
        .or_else(|| cfg.cache_dir.clone());
    let ctx = commands::Context { cfg, cache_dir };
    match cli.command {
        Command::Profile(a) => commands::profile(&ctx, a),
        Command::Roots(a) => commands::roots(&ctx, a),
        Command::Jost(a) => commands::jost(&ctx, a),
        Command::Connect(a) => commands::connect(&ctx, a),
        Command::Transform(a) => commands::transform(&ctx, a),
        Command::Evolve(a) => commands::evolve(&ctx, a),
        Command::Validate(a) => commands::validate(&ctx, a),
        Command::Plot(a) => plot::plot(&a.input, &a.out),
        Command::Config(a) => io::save(a.out.as_deref(), ctx.cfg.to_toml().as_bytes()),
    }
}
