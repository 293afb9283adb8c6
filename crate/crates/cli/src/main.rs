use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use toric_neat::perspective::NoiseKind;
use toric_neat_cli::commands::{
    cmd_baseline, cmd_count_params, cmd_evaluate, cmd_train, cmd_transplant, BaselineArgs,
    EvaluateArgs, TrainArgs,
};
use toric_neat_cli::CliError;

#[derive(Parser)]
#[command(
    name = "toric-neat",
    version,
    about = "NEAT decoders for the toric code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Bitflip,
    Depolarizing,
}

impl From<ModeArg> for NoiseKind {
    fn from(mode: ModeArg) -> NoiseKind {
        match mode {
            ModeArg::Bitflip => NoiseKind::Bitflip,
            ModeArg::Depolarizing => NoiseKind::Depolarizing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a training loop from a config file (TOML or JSON; a manifest
    /// from a previous run also works).
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; overrides the config. 0 means one per core.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a genome's fidelity curve.
    Evaluate {
        #[arg(long)]
        genome: PathBuf,
        /// Comma-separated error rates; defaults to the mode's grid.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10_000)]
        games: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append Wilson 95% interval columns.
        #[arg(long)]
        wilson: bool,
        /// Step budget per game, in units of d*d.
        #[arg(long, default_value_t = 4)]
        max_steps_factor: usize,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the matching decoder's fidelity curve.
    Baseline {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Comma-separated error rates; defaults to the mode's grid.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10_000)]
        games: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defect-count cap per matching instance.
        #[arg(long, default_value_t = 20)]
        max_defects: usize,
        /// Score an over-limit game as a loss instead of failing.
        #[arg(long)]
        over_limit_is_loss: bool,
        /// Append Wilson 95% interval columns.
        #[arg(long)]
        wilson: bool,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-embed a genome on a larger lattice.
    Transplant {
        #[arg(long)]
        genome: PathBuf,
        /// Target lattice distance; odd and larger than the source.
        #[arg(long)]
        d2: usize,
        /// Output path; defaults to `<genome>-d<d2>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a genome's parameter count.
    CountParams {
        #[arg(long)]
        genome: PathBuf,
    },
}

fn emit(csv: String, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            config,
            seed,
            workers,
            out,
        } => {
            let report = cmd_train(&TrainArgs {
                config,
                seed,
                workers,
                out,
            })?;
            println!(
                "run {} finished: {} generations, champion heldout {:.4}, {} params, artifacts in {}",
                report.run_id,
                report.generations_run,
                report.champion_heldout,
                report.champion_params,
                report.out_dir.display()
            );
            Ok(())
        }
        Command::Evaluate {
            genome,
            p,
            games,
            seed,
            wilson,
            max_steps_factor,
            workers,
            out,
        } => {
            let csv = cmd_evaluate(&EvaluateArgs {
                genome,
                p,
                games,
                seed,
                wilson,
                max_steps_factor,
                workers,
            })?;
            emit(csv, out.as_ref())
        }
        Command::Baseline {
            d,
            mode,
            p,
            games,
            seed,
            max_defects,
            over_limit_is_loss,
            wilson,
            workers,
            out,
        } => {
            let csv = cmd_baseline(&BaselineArgs {
                d,
                mode: mode.into(),
                p,
                games,
                seed,
                max_defects,
                over_limit_is_loss,
                wilson,
                workers,
            })?;
            emit(csv, out.as_ref())
        }
        Command::Transplant { genome, d2, out } => {
            let path = cmd_transplant(&genome, d2, out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::CountParams { genome } => {
            let count = cmd_count_params(&genome)?;
            println!("{count}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
