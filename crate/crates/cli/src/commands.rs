//! The five harness operations: train, evaluate, baseline, transplant,
//! count-params.
//!
//! Evaluation campaigns draw one RNG stream per (error-rate index, game
//! index), so results are identical for any worker count. Every emitted
//! file carries a run id column or field tying it back to its manifest or
//! invocation.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use toric_neat::evolution::{evolve, play_game, GameMode, HistoryRow};
use toric_neat::io::{load_genome, save_genome};
use toric_neat::mwpm::{mwpm_decode, MatchingConfig};
use toric_neat::network::compile;
use toric_neat::perspective::NoiseKind;
use toric_neat::rng::{domain, stream};
use toric_neat::toric::{NoiseModel, ToricState};
use toric_neat::transplant::transplant;
use toric_neat::Error;

use crate::config::{default_eval_grid, RunConfig};
use crate::manifest::{command_run_id, fnv1a64, Manifest};
use crate::CliError;

pub struct TrainArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

pub struct TrainReport {
    pub run_id: String,
    pub out_dir: PathBuf,
    pub generations_run: usize,
    pub champion_heldout: f64,
    pub champion_params: usize,
}

pub struct EvaluateArgs {
    pub genome: PathBuf,
    pub p: Option<Vec<f64>>,
    pub games: usize,
    pub seed: u64,
    pub wilson: bool,
    pub max_steps_factor: usize,
    pub workers: usize,
}

pub struct BaselineArgs {
    pub d: usize,
    pub mode: NoiseKind,
    pub p: Option<Vec<f64>>,
    pub games: usize,
    pub seed: u64,
    pub max_defects: usize,
    pub over_limit_is_loss: bool,
    pub wilson: bool,
    pub workers: usize,
}

/// One row of a fidelity curve.
pub struct FidelityRow {
    pub p_error: f64,
    pub games_played: usize,
    pub games_won: u64,
    pub logical_fidelity: f64,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainReport, CliError> {
    let mut rc = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        rc.seed = seed;
    }
    if let Some(workers) = args.workers {
        rc.workers = workers;
    }
    if let Some(out) = &args.out {
        rc.out = out.display().to_string();
    }
    let cfg = rc.evolution_config()?;
    let manifest = Manifest::new(rc.clone());

    let out_dir = PathBuf::from(&rc.out);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;

    let pool = thread_pool(rc.workers)?;
    let outcome = pool.install(|| evolve::<f64>(&cfg, rc.seed, None))?;

    save_genome(
        &out_dir.join("champion.json"),
        &outcome.champion,
        cfg.mode,
        Some(&manifest.run_id),
    )?;
    write_text(
        &out_dir.join("history.csv"),
        &history_csv(&outcome.history, &manifest.run_id),
    )?;
    manifest.save(&out_dir.join("manifest.json"))?;

    Ok(TrainReport {
        run_id: manifest.run_id,
        out_dir,
        generations_run: outcome.history.len(),
        champion_heldout: outcome.champion_heldout,
        champion_params: outcome.champion.param_count(),
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<String, CliError> {
    check_games(args.games)?;
    if args.max_steps_factor == 0 {
        return Err(CliError::Config(
            "max_steps_factor must be at least 1".to_string(),
        ));
    }
    let bytes = read_input(&args.genome)?;
    let (genome, mode, _) = load_genome::<f64>(&args.genome)?;
    let d = mode
        .d_for_inputs(genome.n_in())
        .expect("load_genome checked arity");
    let net = compile(&genome)?;
    let grid = checked_grid(args.p.as_deref(), mode)?;
    let max_steps = args.max_steps_factor * d * d;

    let run_id = command_run_id(&[
        "evaluate",
        &format!("{:016x}", fnv1a64(&bytes)),
        &grid_key(&grid),
        &args.games.to_string(),
        &args.seed.to_string(),
        &args.max_steps_factor.to_string(),
    ]);

    let rows = campaign(&grid, args.games, args.workers, |pi, game| {
        let mut rng = stream(args.seed, domain::EVAL_GAMES, pi as u64, game as u64);
        let mut state = ToricState::new(d)?;
        state.apply_noise(noise(mode, grid[pi]), &mut rng);
        play_game(&net, state, mode, GameMode::Evaluation, max_steps)
    })?;
    Ok(fidelity_csv(&rows, args.wilson, &run_id))
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<String, CliError> {
    check_games(args.games)?;
    ToricState::new(args.d).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = checked_grid(args.p.as_deref(), args.mode)?;
    let cfg = MatchingConfig {
        max_defects: args.max_defects,
        over_limit_is_loss: args.over_limit_is_loss,
    };

    let run_id = command_run_id(&[
        "baseline",
        &args.d.to_string(),
        args.mode.name(),
        &grid_key(&grid),
        &args.games.to_string(),
        &args.seed.to_string(),
        &args.max_defects.to_string(),
        &args.over_limit_is_loss.to_string(),
    ]);

    let rows = campaign(&grid, args.games, args.workers, |pi, game| {
        let mut rng = stream(args.seed, domain::EVAL_GAMES, pi as u64, game as u64);
        let mut state = ToricState::new(args.d)?;
        state.apply_noise(noise(args.mode, grid[pi]), &mut rng);
        mwpm_decode(&state, &cfg)
    })?;
    Ok(fidelity_csv(&rows, args.wilson, &run_id))
}

/// Re-embed a genome on a larger lattice; returns the output path.
pub fn cmd_transplant(
    genome_path: &Path,
    d2: usize,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    read_input(genome_path)?;
    let (genome, mode, run_id) = load_genome::<f64>(genome_path)?;
    let grown = transplant(&genome, mode, d2)?;
    let out_path = match out {
        Some(path) => path.to_path_buf(),
        None => {
            let stem = genome_path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("genome");
            genome_path.with_file_name(format!("{stem}-d{d2}.json"))
        }
    };
    save_genome(&out_path, &grown, mode, run_id.as_deref())?;
    Ok(out_path)
}

pub fn cmd_count_params(genome_path: &Path) -> Result<usize, CliError> {
    read_input(genome_path)?;
    let (genome, _, _) = load_genome::<f64>(genome_path)?;
    Ok(genome.param_count())
}

fn noise(mode: NoiseKind, p: f64) -> NoiseModel {
    match mode {
        NoiseKind::Bitflip => NoiseModel::Bitflip { p },
        NoiseKind::Depolarizing => NoiseModel::Depolarizing { p },
    }
}

fn check_games(games: usize) -> Result<(), CliError> {
    if games == 0 {
        return Err(CliError::Config("games must be at least 1".to_string()));
    }
    Ok(())
}

/// Distinguishes a missing input file (usage error) from a malformed one
/// (contract violation), and feeds the run-id hash.
fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn checked_grid(p: Option<&[f64]>, mode: NoiseKind) -> Result<Vec<f64>, CliError> {
    let grid = match p {
        Some(values) => values.to_vec(),
        None => default_eval_grid(mode),
    };
    for &p in &grid {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Config(format!(
                "error rate must lie in [0, 1], got {p}"
            )));
        }
    }
    Ok(grid)
}

fn grid_key(grid: &[f64]) -> String {
    grid.iter()
        .map(|p| format!("{:016x}", p.to_bits()))
        .collect::<Vec<_>>()
        .join(",")
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot build worker pool: {e}")))
}

/// Run `games` independent games per grid point; `play(pi, game)` must
/// derive all randomness from its indices.
fn campaign<W>(
    grid: &[f64],
    games: usize,
    workers: usize,
    play: W,
) -> Result<Vec<FidelityRow>, CliError>
where
    W: Fn(usize, usize) -> Result<bool, Error> + Sync,
{
    let pool = thread_pool(workers)?;
    let rows = pool.install(|| {
        grid.iter()
            .enumerate()
            .map(|(pi, &p)| {
                let wins = (0..games)
                    .into_par_iter()
                    .map(|game| play(pi, game).map(u64::from))
                    .try_reduce(|| 0, |a, b| Ok(a + b))?;
                Ok(FidelityRow {
                    p_error: p,
                    games_played: games,
                    games_won: wins,
                    logical_fidelity: wins as f64 / games as f64,
                })
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(rows)
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson95(won: u64, games: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = games as f64;
    let p = won as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn fidelity_csv(rows: &[FidelityRow], wilson: bool, run_id: &str) -> String {
    let mut out = String::from("p_error,games_played,games_won,logical_fidelity");
    if wilson {
        out.push_str(",wilson_low,wilson_high");
    }
    out.push_str(",run_id\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            row.p_error, row.games_played, row.games_won, row.logical_fidelity
        ));
        if wilson {
            let (low, high) = wilson95(row.games_won, row.games_played);
            out.push_str(&format!(",{low},{high}"));
        }
        out.push_str(&format!(",{run_id}\n"));
    }
    out
}

pub fn history_csv(rows: &[HistoryRow], run_id: &str) -> String {
    let mut out = String::from(
        "generation,best_fitness,mean_fitness,n_species,champion_heldout,param_count_champion,run_id\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{run_id}\n",
            row.generation,
            row.best_fitness,
            row.mean_fitness,
            row.n_species,
            row.champion_heldout,
            row.param_count_champion,
        ));
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
