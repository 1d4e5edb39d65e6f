//! `qeraser`: command-line front end for the quantum-eraser simulation.
//!
//! Subcommands: `weak-value`, `figure2`, `figure3`, `montecarlo`,
//! `fit-purity`, `verify`. All randomness is seeded (`--seed`, default 42);
//! output CSVs and manifests are byte-identical across repeated runs.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod angles;
mod commands;
mod output;
mod scenario;

use angles::{parse_angle, parse_angle_grid};
use commands::{
    cmd_figure2, cmd_figure3, cmd_fit_purity, cmd_montecarlo, cmd_verify, cmd_weak_value,
    parse_axis, parse_matrix, parse_state, FitPurityArgs, MonteCarloArgs, WeakValueInputs,
};
use qeraser_core::experiment::{ScenarioSpec, DEFAULT_SEED};
use qeraser_core::qmath::PureState;
use scenario::{resolve_spec, SpecOverrides};

#[derive(Parser)]
#[command(
    name = "qeraser",
    version,
    about = "Qubit-meter quantum eraser: modular and weak values in polar form"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print weak and modular values for one pre/post-selection.
    #[command(name = "weak-value")]
    WeakValue(WeakValueCli),
    /// Visibility, argument and branch criterion across post-selections.
    #[command(name = "figure2")]
    Figure2(FigureCli),
    /// Weak values from the polar pipeline vs the weak approximation.
    #[command(name = "figure3")]
    Figure3(FigureCli),
    /// Visibility-estimator statistics over seeded repetitions.
    #[command(name = "montecarlo")]
    Montecarlo(MonteCli),
    /// Recover the meter purity from synthetic coincidence scans.
    #[command(name = "fit-purity")]
    FitPurity(FitPurityCli),
    /// Run the cross-route consistency suites.
    #[command(name = "verify")]
    Verify(VerifyCli),
}

#[derive(Args)]
struct WeakValueCli {
    /// Pauli axis: x, y, z or "nx,ny,nz" (normalized).
    #[arg(long)]
    n: Option<String>,
    /// Explicit Hermitian observable: eight reals "re,im,..." row major.
    #[arg(long, conflicts_with = "n")]
    obs: Option<String>,
    /// Post-selection angle: psi_f = cos(alpha)|0> + sin(alpha)|1>.
    #[arg(long)]
    alpha: Option<String>,
    /// Explicit post-selection "re0,im0,re1,im1".
    #[arg(long, conflicts_with = "alpha")]
    psi_f: Option<String>,
    /// Pre-selection "re0,im0,re1,im1" (default |0>).
    #[arg(long)]
    psi_i: Option<String>,
    /// Coupling strength (default pi).
    #[arg(long)]
    g: Option<String>,
}

#[derive(Args)]
struct FigureCli {
    /// Random seed (fixed default, never wall clock).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coincidence counts per phase setting.
    #[arg(long)]
    counts: Option<u64>,
    /// Measurement strength; switches to a single custom setup.
    #[arg(long)]
    theta: Option<String>,
    /// Meter purity; switches to a single custom setup.
    #[arg(long)]
    purity: Option<f64>,
    /// Post-selection grid: angle, comma list, or start:end:count.
    #[arg(long)]
    alpha: Option<String>,
    /// Flat key-value override file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MonteCli {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Counts per phase setting (default 10000).
    #[arg(long)]
    counts: Option<u64>,
    /// Number of repeated scans (default 1000).
    #[arg(long)]
    trials: Option<usize>,
    /// Measurement strength (default 0.5pi).
    #[arg(long)]
    theta: Option<String>,
    /// Meter purity (default 1).
    #[arg(long)]
    purity: Option<f64>,
    /// Post-selection angle (default atan(1/3): visibility 0.6).
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Args)]
struct FitPurityCli {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Counts per phase setting (default 100000).
    #[arg(long)]
    counts: Option<u64>,
    /// Measurement strength (default 0.297pi).
    #[arg(long)]
    theta: Option<String>,
    /// True purity used to synthesize the data (default 0.836).
    #[arg(long)]
    purity: Option<f64>,
    /// Post-selection grid (default 0.05pi:0.45pi:9).
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Args)]
struct VerifyCli {
    /// Trials per suite (default 1000).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn figure_spec(cli: &FigureCli, default: ScenarioSpec<f64>) -> Result<ScenarioSpec<f64>> {
    let overrides = SpecOverrides {
        seed: cli.seed,
        counts: cli.counts,
        theta: cli.theta.as_deref().map(parse_angle).transpose()?,
        purity: cli.purity,
        alpha_grid: cli.alpha.as_deref().map(parse_angle_grid).transpose()?,
    };
    resolve_spec(default, cli.config.as_deref(), &overrides)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::WeakValue(args) => {
            let psi_f = match (&args.alpha, &args.psi_f) {
                (Some(alpha), None) => PureState::real_superposition(parse_angle(alpha)?),
                (None, Some(text)) => parse_state(text)?,
                _ => anyhow::bail!("exactly one of --alpha or --psi-f must be given"),
            };
            let inputs = WeakValueInputs {
                axis: args.n.as_deref().map(parse_axis).transpose()?,
                matrix: args.obs.as_deref().map(parse_matrix).transpose()?,
                psi_i: args
                    .psi_i
                    .as_deref()
                    .map(parse_state)
                    .transpose()?
                    .unwrap_or_else(PureState::zero),
                psi_f,
                g: args
                    .g
                    .as_deref()
                    .map(parse_angle)
                    .transpose()?
                    .unwrap_or(std::f64::consts::PI),
            };
            cmd_weak_value(&inputs)
        }
        Command::Figure2(args) => {
            let spec = figure_spec(&args, ScenarioSpec::figure2_default())?;
            let out = args.out.unwrap_or_else(commands::default_out_dir);
            cmd_figure2(&spec, &out)
        }
        Command::Figure3(args) => {
            let spec = figure_spec(&args, ScenarioSpec::figure3_default())?;
            let out = args.out.unwrap_or_else(commands::default_out_dir);
            cmd_figure3(&spec, &out)
        }
        Command::Montecarlo(args) => {
            let monte = MonteCarloArgs {
                theta: args
                    .theta
                    .as_deref()
                    .map(parse_angle)
                    .transpose()?
                    .unwrap_or(std::f64::consts::FRAC_PI_2),
                purity: args.purity.unwrap_or(1.0),
                alpha: args
                    .alpha
                    .as_deref()
                    .map(parse_angle)
                    .transpose()?
                    .unwrap_or((1.0f64 / 3.0).atan()),
                trials: args.trials.unwrap_or(1000),
                counts: args.counts.unwrap_or(10_000),
                seed: args.seed.unwrap_or(DEFAULT_SEED),
            };
            let out = args.out.unwrap_or_else(commands::default_out_dir);
            cmd_montecarlo(&monte, &out)
        }
        Command::FitPurity(args) => {
            let fit = FitPurityArgs {
                theta: args
                    .theta
                    .as_deref()
                    .map(parse_angle)
                    .transpose()?
                    .unwrap_or(0.297 * std::f64::consts::PI),
                purity: args.purity.unwrap_or(0.836),
                counts: args.counts.unwrap_or(100_000),
                alpha_grid: args
                    .alpha
                    .as_deref()
                    .map(parse_angle_grid)
                    .transpose()?
                    .unwrap_or_else(|| {
                        qeraser_core::experiment::linspace(
                            0.05 * std::f64::consts::PI,
                            0.45 * std::f64::consts::PI,
                            9,
                        )
                    }),
                seed: args.seed.unwrap_or(DEFAULT_SEED),
            };
            let out = args.out.unwrap_or_else(commands::default_out_dir);
            cmd_fit_purity(&fit, &out)
        }
        Command::Verify(args) => cmd_verify(
            args.trials.unwrap_or(1000),
            args.seed.unwrap_or(DEFAULT_SEED),
        ),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
