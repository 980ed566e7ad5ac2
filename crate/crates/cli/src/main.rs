use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Infinitesimal rigidity of bar-joint frameworks in normed spaces.
#[derive(Parser, Debug)]
#[command(name = "normrig", version)]
struct Cli {
    /// Relative singular-value tolerance for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Reject unknown JSON fields and fail on rank decisions with margin below 10x tolerance.
    #[arg(long, global = true)]
    strict: bool,
    /// Emit JSON instead of a text table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a framework and run the counting audits.
    Analyze {
        file: PathBuf,
        /// Write the rigidity matrix here.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
        matrix_format: MatrixFormat,
    },
    /// Trace a finite flex along a nontrivial infinitesimal flex.
    Trace {
        file: PathBuf,
        /// Which basis vector of the nontrivial flexes to start along.
        #[arg(long, default_value_t = 0)]
        direction_index: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1e-2)]
        step_size: f64,
        /// Path JSON destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample nearby equal-length configurations and compare with the isometry orbit.
    Probe {
        file: PathBuf,
        /// Perturbation half-width (default 0.05 x placement scale).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
    },
    /// Lie algebra of the linear isometry group of a space (space or framework JSON).
    Lie { file: PathBuf },
    /// All audits for a framework, one row each.
    Audit { file: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = commands::RunConfig {
        tol: cli.tol,
        seed: cli.seed,
        strict: cli.strict,
        json: cli.json,
    };
    let result = match cli.command {
        Command::Analyze {
            file,
            matrix_out,
            matrix_format,
        } => commands::analyze(
            &run,
            &file,
            matrix_out.as_deref(),
            matrix_format == MatrixFormat::Json,
        ),
        Command::Trace {
            file,
            direction_index,
            steps,
            step_size,
            out,
        } => commands::trace(
            &run,
            &file,
            direction_index,
            steps,
            step_size,
            out.as_deref(),
        ),
        Command::Probe {
            file,
            radius,
            restarts,
        } => commands::probe(&run, &file, radius, restarts),
        Command::Lie { file } => commands::lie(&run, &file),
        Command::Audit { file } => commands::audit(&run, &file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
