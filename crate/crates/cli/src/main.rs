//! `bosonic-polar` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bosonic_polar_cli::commands::{cmd_chi2, cmd_constellation, cmd_polar, cmd_rates};
use bosonic_polar_cli::{CliError, Format, Overrides, RunConfig, VERSION};
use clap::{Args, Parser, Subcommand};

/// Achievable rates, divergence bounds and polar-coded simulation for
/// finite constellations over the thermal bosonic channel.
#[derive(Parser)]
#[command(name = "bosonic-polar", version = VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical and quantum rates per constellation kind and size.
    Rates(CommonArgs),
    /// Chi-square divergences and the receiver-gap bound they imply.
    Chi2(CommonArgs),
    /// Design and simulate a multilevel polar code (JSON report).
    Polar(PolarArgs),
    /// Dump constellation points and probabilities.
    Constellation(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Amplitude transmittivity, 0 < k < 1.
    #[arg(long)]
    k: Option<f64>,
    /// Mean photon number of the environment.
    #[arg(long)]
    n0: Option<f64>,
    /// Mean photon number of the input.
    #[arg(long)]
    n: Option<f64>,
    /// Comma-separated constellation kinds, or `all`.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Smallest number of points per quadrature.
    #[arg(long)]
    m_min: Option<usize>,
    /// Largest number of points per quadrature.
    #[arg(long)]
    m_max: Option<usize>,
    /// Fock-space cutoff override.
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for every random draw.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct PolarArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Points per quadrature (power of two).
    #[arg(long)]
    m: Option<usize>,
    /// Polar blocklength (power of two).
    #[arg(long)]
    blocklength: Option<usize>,
    /// Frames to simulate; 0 runs the code design only.
    #[arg(long)]
    trials: Option<usize>,
    /// Fraction of the estimated heterodyne information carried as data.
    #[arg(long)]
    backoff: Option<f64>,
    /// Genie-aided Monte Carlo trials per level for code construction.
    #[arg(long)]
    mc_budget: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            k: self.k,
            n0: self.n0,
            n: self.n,
            kinds: self.kinds.clone(),
            m_min: self.m_min,
            m_max: self.m_max,
            dim: self.dim,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            ..Default::default()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, overrides) = match &cli.command {
        Command::Rates(a) | Command::Chi2(a) | Command::Constellation(a) => (a, a.overrides()),
        Command::Polar(a) => (
            &a.common,
            Overrides {
                polar_m: a.m,
                blocklength: a.blocklength,
                trials: a.trials,
                backoff: a.backoff,
                mc_budget: a.mc_budget,
                ..a.common.overrides()
            },
        ),
    };
    let cfg = RunConfig::resolve(common.config.as_deref(), &overrides)?;
    if matches!(cli.command, Command::Polar(_)) && cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("the polar report is only available as JSON".into()));
    }
    let (output, natural) = match cli.command {
        Command::Rates(_) => (cmd_rates(&cfg)?, Format::Csv),
        Command::Chi2(_) => (cmd_chi2(&cfg)?, Format::Csv),
        Command::Constellation(_) => (cmd_constellation(&cfg)?, Format::Csv),
        Command::Polar(_) => (cmd_polar(&cfg, VERSION)?, Format::Json),
    };
    let format = cfg.format.unwrap_or(natural);
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output.write(format, VERSION, &mut w)?;
            w.flush()?;
        }
        None => output.write(format, VERSION, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
