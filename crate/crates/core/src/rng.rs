//! Deterministic stream derivation.
//!
//! Every random decision in a run draws from a `ChaCha8Rng` seeded by
//! `(master, domain, a, b)`. Streams for different purposes never share
//! state, so parallel sections can evaluate in any order without touching
//! an RNG, and adding draws to one phase cannot shift another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Values are part of the reproducibility contract: changing
/// them changes every run's output.
pub mod domain {
    /// Initial population sampling.
    pub const INIT: u64 = 1;
    /// Per-generation training puzzle sets (`a` = generation).
    pub const PUZZLES: u64 = 2;
    /// The held-out evaluation set, generated once per run.
    pub const HELDOUT: u64 = 3;
    /// Reproduction (selection, crossover, mutation; `a` = generation).
    pub const REPRODUCE: u64 = 4;
    /// Evaluation-campaign games (`a` = error-rate index, `b` = game index).
    pub const EVAL_GAMES: u64 = 5;
    /// Population seeding from a transplanted genome.
    pub const SEED_POP: u64 = 6;
}

/// Derive the stream identified by `(domain, a, b)` from a master seed.
pub fn stream(master: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&domain.to_le_bytes());
    seed[16..24].copy_from_slice(&a.to_le_bytes());
    seed[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
