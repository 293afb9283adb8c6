//! Run configuration: a flat key set, stored as TOML or JSON.
//!
//! Every key has a default, so a minimal config file is valid; unknown keys
//! are rejected so typos cannot silently fall back to defaults. The same
//! struct round-trips through the run manifest, and its semantic fields
//! (everything except `workers` and `out`, which cannot affect results)
//! feed the run id.

use std::path::Path;

use serde::{Deserialize, Serialize};

use toric_neat::evolution::{EvolutionConfig, Selection};
use toric_neat::genome::MutationConfig;
use toric_neat::perspective::NoiseKind;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionKind {
    Truncation,
    Tournament,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: NoiseKind,
    pub d: usize,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    /// Output directory for artifacts.
    pub out: String,

    pub pop_size: usize,
    pub generations: u32,
    /// Empty means the per-mode default.
    pub training_error_rates: Vec<f64>,
    pub games_per_rate: usize,
    pub heldout_games: usize,
    pub max_steps_factor: usize,

    pub weight_mutation_rate: f64,
    pub weight_replace_prob: f64,
    pub weight_perturb_std: f64,
    pub weight_replace_std: f64,
    pub bias_mutation_rate: f64,
    pub connection_structural_rate: f64,
    pub node_structural_rate: f64,
    pub toggle_rate: f64,
    pub structural_attempts: u32,

    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_c: f64,
    pub elitism: usize,
    pub survival_fraction: f64,
    pub stagnation_limit: u32,
    pub selection: SelectionKind,
    pub tournament_size: usize,
    pub early_stop_heldout: Option<f64>,

    /// Empty means the per-mode default grid.
    pub eval_error_rates: Vec<f64>,
    pub eval_games: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mutation = MutationConfig::default();
        RunConfig {
            mode: NoiseKind::Bitflip,
            d: 3,
            seed: 0,
            workers: 0,
            out: ".".to_string(),
            pop_size: 150,
            generations: 600,
            training_error_rates: Vec::new(),
            games_per_rate: 100,
            heldout_games: 5000,
            max_steps_factor: 4,
            weight_mutation_rate: mutation.weight_mutation_rate,
            weight_replace_prob: mutation.weight_replace_prob,
            weight_perturb_std: mutation.weight_perturb_std,
            weight_replace_std: mutation.weight_replace_std,
            bias_mutation_rate: mutation.bias_mutation_rate,
            connection_structural_rate: mutation.connection_structural_rate,
            node_structural_rate: mutation.node_structural_rate,
            toggle_rate: mutation.toggle_rate,
            structural_attempts: mutation.structural_attempts,
            c1: 1.0,
            c2: 1.0,
            c3: 0.5,
            delta_c: 3.0,
            elitism: 2,
            survival_fraction: 0.2,
            stagnation_limit: 15,
            selection: SelectionKind::Truncation,
            tournament_size: 3,
            early_stop_heldout: None,
            eval_error_rates: Vec::new(),
            eval_games: 10_000,
        }
    }
}

/// Default evaluation grid for a mode: 0.01 to 0.15 in steps of 0.02,
/// extended to 0.20 for depolarizing noise.
pub fn default_eval_grid(mode: NoiseKind) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..8).map(|i| 0.01 + 0.02 * i as f64).collect();
    if mode == NoiseKind::Depolarizing {
        grid.extend([0.17, 0.20]);
    }
    grid
}

impl RunConfig {
    /// Parse a config file; TOML and JSON are interchangeable. A run
    /// manifest is also accepted, contributing its embedded config.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let looks_like_json = text.trim_start().starts_with('{');
        if looks_like_json {
            if let Ok(manifest) = serde_json::from_str::<crate::manifest::Manifest>(&text) {
                return Ok(manifest.config);
            }
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn training_rates(&self) -> Vec<f64> {
        if self.training_error_rates.is_empty() {
            match self.mode {
                NoiseKind::Bitflip => vec![0.01, 0.05, 0.10, 0.15],
                NoiseKind::Depolarizing => vec![0.01, 0.05, 0.10, 0.15, 0.20],
            }
        } else {
            self.training_error_rates.clone()
        }
    }

    pub fn eval_rates(&self) -> Vec<f64> {
        if self.eval_error_rates.is_empty() {
            default_eval_grid(self.mode)
        } else {
            self.eval_error_rates.clone()
        }
    }

    pub fn evolution_config(&self) -> Result<EvolutionConfig, CliError> {
        let cfg = EvolutionConfig {
            mode: self.mode,
            d: self.d,
            pop_size: self.pop_size,
            generations: self.generations,
            training_error_rates: self.training_rates(),
            games_per_rate: self.games_per_rate,
            heldout_games: self.heldout_games,
            max_steps_factor: self.max_steps_factor,
            mutation: MutationConfig {
                weight_mutation_rate: self.weight_mutation_rate,
                weight_replace_prob: self.weight_replace_prob,
                weight_perturb_std: self.weight_perturb_std,
                weight_replace_std: self.weight_replace_std,
                bias_mutation_rate: self.bias_mutation_rate,
                connection_structural_rate: self.connection_structural_rate,
                node_structural_rate: self.node_structural_rate,
                toggle_rate: self.toggle_rate,
                structural_attempts: self.structural_attempts,
            },
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            delta_c: self.delta_c,
            elitism: self.elitism,
            survival_fraction: self.survival_fraction,
            stagnation_limit: self.stagnation_limit,
            selection: match self.selection {
                SelectionKind::Truncation => Selection::Truncation,
                SelectionKind::Tournament => Selection::Tournament {
                    size: self.tournament_size,
                },
            },
            early_stop_heldout: self.early_stop_heldout,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}
