//! `chshlab`: evaluate, simulate, certify, sweep and optimize CHSH setups.
//!
//! Exit codes: 0 success (or Feasible), 2 usage error, 3 Infeasible
//! (`certify` only), 4 I/O error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use chshlab_core::{DirectionConfig, Model};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{SweepParam, SweepSpec};
use report::{Format, Report};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn from_core(e: chshlab_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chshlab",
    version,
    about = "Classical vs quantum CHSH laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Clone)]
struct Angles {
    /// Axes a a' b b' in degrees.
    #[arg(
        long,
        num_args = 4,
        value_names = ["A", "A_PRIME", "B", "B_PRIME"],
        allow_negative_numbers = true,
        conflicts_with = "rad"
    )]
    deg: Option<Vec<f64>>,
    /// Axes a a' b b' in radians.
    #[arg(
        long,
        num_args = 4,
        value_names = ["A", "A_PRIME", "B", "B_PRIME"],
        allow_negative_numbers = true
    )]
    rad: Option<Vec<f64>>,
}

impl Angles {
    fn is_given(&self) -> bool {
        self.deg.is_some() || self.rad.is_some()
    }

    fn in_degrees(&self) -> bool {
        self.deg.is_some()
    }

    fn config(&self) -> Result<DirectionConfig, CliError> {
        match (&self.deg, &self.rad) {
            (Some(v), None) => DirectionConfig::from_degrees(v[0], v[1], v[2], v[3]),
            (None, Some(v)) => DirectionConfig::from_radians(v[0], v[1], v[2], v[3]),
            _ => {
                return Err(CliError::Usage(
                    "angles are required: pass --deg or --rad with four values".into(),
                ))
            }
        }
        .map_err(CliError::from_core)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Quantum,
    Cascade,
}

#[derive(Subcommand)]
enum Command {
    /// CHSH value of the singlet at given axes, or the classical maximum.
    Chsh {
        #[arg(
            long,
            conflicts_with = "classical_max",
            required_unless_present = "classical_max"
        )]
        quantum: bool,
        /// Maximum over the 16 deterministic outcome assignments.
        #[arg(long)]
        classical_max: bool,
        #[command(flatten)]
        angles: Angles,
        #[command(flatten)]
        output: Output,
    },
    /// Decide whether a classical joint reproduces the quantum pair marginals.
    Certify {
        #[command(flatten)]
        angles: Angles,
        #[command(flatten)]
        output: Output,
    },
    /// Sample all four settings and estimate CHSH with its standard error.
    Simulate {
        #[arg(long, value_enum, default_value = "quantum")]
        model: ModelArg,
        /// Trials per setting.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        angles: Angles,
        #[command(flatten)]
        output: Output,
    },
    /// Vary one angle and tabulate P(+,+) for both models.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Range start, in the unit of --deg/--rad.
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Keep a' = a and b' = b at every point.
        #[arg(long)]
        track: bool,
        #[command(flatten)]
        angles: Angles,
        #[command(flatten)]
        output: Output,
    },
    /// Search for the axes maximizing the quantum CHSH value.
    Optimize {
        #[arg(long, default_value_t = 64)]
        grid_steps: usize,
        #[arg(long, default_value_t = 40)]
        refine_iters: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(report: &Report, output: &Output, default: Format) -> Result<(), CliError> {
    let text = report::render(report, output.format.unwrap_or(default))?;
    report::emit(&text, output.out.as_deref())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Chsh {
            quantum,
            classical_max,
            angles,
            output,
        } => {
            let report = if classical_max {
                if angles.is_given() {
                    return Err(CliError::Usage("--classical-max takes no angles".into()));
                }
                commands::chsh_classical_report()
            } else {
                debug_assert!(quantum);
                commands::chsh_quantum_report(&angles.config()?)
            };
            emit(&report, &output, Format::Json)?;
            Ok(0)
        }
        Command::Certify { angles, output } => {
            let (report, feasible) = commands::certify_report(&angles.config()?)?;
            emit(&report, &output, Format::Json)?;
            Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
        }
        Command::Simulate {
            model,
            trials,
            seed,
            angles,
            output,
        } => {
            let model = match model {
                ModelArg::Quantum => Model::Quantum,
                ModelArg::Cascade => Model::Cascade,
            };
            let report = commands::simulate_report(&angles.config()?, model, trials, seed)?;
            emit(&report, &output, Format::Json)?;
            Ok(0)
        }
        Command::Sweep {
            param,
            from,
            to,
            steps,
            track,
            angles,
            output,
        } => {
            let base = angles.config()?;
            let unit = |x: f64| {
                if angles.in_degrees() {
                    chshlab_core::Angle::from_degrees(x)
                } else {
                    chshlab_core::Angle::from_radians(x)
                }
            };
            let sweep = SweepSpec {
                param,
                from: unit(from),
                to: unit(to),
                steps,
                track,
            };
            emit(
                &commands::sweep_report(&base, &sweep)?,
                &output,
                Format::Csv,
            )?;
            Ok(0)
        }
        Command::Optimize {
            grid_steps,
            refine_iters,
            output,
        } => {
            emit(
                &commands::optimize_report(grid_steps, refine_iters)?,
                &output,
                Format::Json,
            )?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Io(m) => eprintln!("I/O error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
