//! The generation loop: decoding games as a fitness function, speciation
//! with explicit fitness sharing, and reproduction.
//!
//! Everything here is deterministic for a fixed `(config, seed)`. The only
//! random inputs are drawn from named [`crate::rng`] streams in sequential
//! phases (puzzle generation, reproduction, population init); games
//! themselves consume no randomness, and the parallel fitness pass only
//! reduces integers, so results do not depend on thread count or schedule.

use std::collections::HashSet;

use log::warn;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::genome::{Genome, InnovationRegistry, MutationConfig};
use crate::network::{compile, Phenotype};
use crate::perspective::{generate_perspectives, select_action, GlobalAction, NoiseKind};
use crate::rng::{domain, stream};
use crate::scalar::Scalar;
use crate::toric::{NoiseModel, ToricState};
use crate::Result;

/// How a decoding game ends.
///
/// Training games punish indecision: re-selecting any action already taken
/// in the same game is an immediate loss, which bounds the game length by
/// the (finite) number of distinct actions. Evaluation games allow repeats
/// but cap the number of steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameMode {
    Training,
    Evaluation,
}

/// Play one decoding game to completion.
///
/// The state must already carry its noise. Returns whether the game was
/// won: the syndrome was cleared (within `max_steps` in Evaluation mode,
/// before any repeated action in Training mode) without a logical error.
pub fn play_game<F: Scalar>(
    net: &Phenotype<F>,
    mut state: ToricState,
    noise: NoiseKind,
    mode: GameMode,
    max_steps: usize,
) -> Result<bool> {
    let mut taken: HashSet<GlobalAction> = HashSet::new();
    let mut steps = 0;
    loop {
        let syndrome = state.syndrome();
        if syndrome.is_empty() {
            return Ok(!state.has_logical_error()?);
        }
        if mode == GameMode::Evaluation && steps >= max_steps {
            return Ok(false);
        }
        let perspectives = generate_perspectives::<F>(&syndrome, noise);
        let action = select_action(net, &perspectives)?;
        if mode == GameMode::Training && !taken.insert(action) {
            return Ok(false);
        }
        state.apply_pauli(action.qubit, action.pauli)?;
        steps += 1;
    }
}

/// One pre-generated error instance, labeled with the rate it was drawn at.
#[derive(Clone, Debug)]
pub struct Puzzle {
    pub p: f64,
    pub state: ToricState,
}

/// A shared set of puzzles; every genome of a generation plays the same
/// instances, so fitness comparisons use common random numbers.
#[derive(Clone, Debug)]
pub struct PuzzleSet {
    pub mode: NoiseKind,
    pub d: usize,
    pub puzzles: Vec<Puzzle>,
}

/// Generate `count` puzzles at each rate of `schedule`, in order.
pub fn generate_puzzle_set<R: Rng + ?Sized>(
    d: usize,
    mode: NoiseKind,
    schedule: &[(f64, usize)],
    rng: &mut R,
) -> Result<PuzzleSet> {
    let mut puzzles = Vec::with_capacity(schedule.iter().map(|&(_, n)| n).sum());
    for &(p, count) in schedule {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "error rate must lie in [0, 1], got {p}"
            )));
        }
        let model = match mode {
            NoiseKind::Bitflip => NoiseModel::Bitflip { p },
            NoiseKind::Depolarizing => NoiseModel::Depolarizing { p },
        };
        for _ in 0..count {
            let mut state = ToricState::new(d)?;
            state.apply_noise(model, rng);
            puzzles.push(Puzzle { p, state });
        }
    }
    Ok(PuzzleSet { mode, d, puzzles })
}

/// Fraction of puzzles won, playing every instance in the set.
///
/// Failures are demoted rather than propagated: a genome that cannot
/// compile (or errors mid-game) scores losses, with a diagnostic, so one
/// bad individual cannot abort a whole run.
pub fn win_rate<F: Scalar>(
    genome: &Genome<F>,
    puzzles: &PuzzleSet,
    mode: GameMode,
    max_steps: usize,
) -> f64 {
    let net = match compile(genome) {
        Ok(net) => net,
        Err(e) => {
            warn!("genome failed to compile, scoring 0: {e}");
            return 0.0;
        }
    };
    let wins: u64 = puzzles
        .puzzles
        .par_iter()
        .map(
            |puzzle| match play_game(&net, puzzle.state.clone(), puzzles.mode, mode, max_steps) {
                Ok(won) => u64::from(won),
                Err(e) => {
                    warn!("game aborted, scoring a loss: {e}");
                    0
                }
            },
        )
        .sum();
    wins as f64 / puzzles.puzzles.len() as f64
}

/// Training-mode win fraction: the fitness used by the generation loop.
pub fn evaluate_fitness<F: Scalar>(
    genome: &Genome<F>,
    puzzles: &PuzzleSet,
    max_steps: usize,
) -> f64 {
    win_rate(genome, puzzles, GameMode::Training, max_steps)
}

/// A niche of structurally similar genomes.
///
/// The representative persists across generations (a deterministic stand-in
/// for the classic randomly sampled member): after each assignment pass it
/// becomes the member closest to the previous representative.
#[derive(Clone, Debug)]
pub struct Species<F: Scalar> {
    pub id: u64,
    pub representative: Genome<F>,
    /// Indices into the current population; refilled every generation.
    pub members: Vec<usize>,
    pub best_fitness_ever: f64,
    /// Generations since `best_fitness_ever` last improved.
    pub stagnation: u32,
}

/// Parent selection inside a species.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Parents drawn uniformly from the top `survival_fraction` of the
    /// species (distinct when the pool has more than one member).
    Truncation,
    /// Each parent is the fittest of `size` uniform draws from the whole
    /// species; draws are independent, so self-pairing can occur.
    Tournament { size: usize },
}

#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub mode: NoiseKind,
    pub d: usize,
    pub pop_size: usize,
    pub generations: u32,
    /// Error rates of the per-generation training sets.
    pub training_error_rates: Vec<f64>,
    /// Puzzles per rate per generation; fitness games total
    /// `games_per_rate * training_error_rates.len()`.
    pub games_per_rate: usize,
    /// Size of the held-out set (generated once, at generation 0) used to
    /// score generation champions.
    pub heldout_games: usize,
    /// Evaluation-mode step cap as a multiple of d*d.
    pub max_steps_factor: usize,
    pub mutation: MutationConfig,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_c: f64,
    pub elitism: usize,
    pub survival_fraction: f64,
    pub stagnation_limit: u32,
    pub selection: Selection,
    /// Stop early once the champion's held-out score reaches this value.
    pub early_stop_heldout: Option<f64>,
}

impl EvolutionConfig {
    /// Defaults for a given noise mode and distance.
    pub fn new(mode: NoiseKind, d: usize) -> Self {
        let training_error_rates = match mode {
            NoiseKind::Bitflip => vec![0.01, 0.05, 0.10, 0.15],
            NoiseKind::Depolarizing => vec![0.01, 0.05, 0.10, 0.15, 0.20],
        };
        EvolutionConfig {
            mode,
            d,
            pop_size: 150,
            generations: 600,
            training_error_rates,
            games_per_rate: 100,
            heldout_games: 5000,
            max_steps_factor: 4,
            mutation: MutationConfig::default(),
            c1: 1.0,
            c2: 1.0,
            c3: 0.5,
            delta_c: 3.0,
            elitism: 2,
            survival_fraction: 0.2,
            stagnation_limit: 15,
            selection: Selection::Truncation,
            early_stop_heldout: None,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps_factor * self.d * self.d
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(name.to_string()))
            }
        };
        check("pop_size must be at least 2", self.pop_size >= 2)?;
        check("d must be at least 2", self.d >= 2)?;
        check("generations must be at least 1", self.generations >= 1)?;
        check(
            "training_error_rates must be non-empty",
            !self.training_error_rates.is_empty(),
        )?;
        check(
            "training_error_rates must lie in [0, 1]",
            self.training_error_rates
                .iter()
                .all(|p| (0.0..=1.0).contains(p)),
        )?;
        check(
            "games_per_rate must be at least 1",
            self.games_per_rate >= 1,
        )?;
        check("heldout_games must be at least 1", self.heldout_games >= 1)?;
        check(
            "max_steps_factor must be at least 1",
            self.max_steps_factor >= 1,
        )?;
        check(
            "survival_fraction must lie in [0, 1]",
            (0.0..=1.0).contains(&self.survival_fraction),
        )?;
        check(
            "compatibility coefficients must be non-negative and finite",
            [self.c1, self.c2, self.c3, self.delta_c]
                .iter()
                .all(|c| c.is_finite() && *c >= 0.0),
        )?;
        for (name, rate) in [
            ("weight_mutation_rate", self.mutation.weight_mutation_rate),
            ("weight_replace_prob", self.mutation.weight_replace_prob),
            ("bias_mutation_rate", self.mutation.bias_mutation_rate),
            (
                "connection_structural_rate",
                self.mutation.connection_structural_rate,
            ),
            ("node_structural_rate", self.mutation.node_structural_rate),
            ("toggle_rate", self.mutation.toggle_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {rate}"
                )));
            }
        }
        if let Selection::Tournament { size } = self.selection {
            check("tournament size must be at least 1", size >= 1)?;
        }
        Ok(())
    }
}

/// Assign every genome to the first species whose representative is closer
/// than `delta_c`; unmatched genomes found new species. Empty species are
/// dropped, and surviving representatives move to the member closest to
/// the old representative.
pub fn speciate<F: Scalar>(
    population: &[Genome<F>],
    species: &mut Vec<Species<F>>,
    next_species_id: &mut u64,
    cfg: &EvolutionConfig,
) {
    for sp in species.iter_mut() {
        sp.members.clear();
    }
    for (i, genome) in population.iter().enumerate() {
        let found = species.iter_mut().find(|sp| {
            Genome::compatibility_distance(genome, &sp.representative, cfg.c1, cfg.c2, cfg.c3)
                < cfg.delta_c
        });
        match found {
            Some(sp) => sp.members.push(i),
            None => {
                species.push(Species {
                    id: *next_species_id,
                    representative: genome.clone(),
                    members: vec![i],
                    best_fitness_ever: f64::NEG_INFINITY,
                    stagnation: 0,
                });
                *next_species_id += 1;
            }
        }
    }
    species.retain(|sp| !sp.members.is_empty());
    for sp in species.iter_mut() {
        let closest = sp
            .members
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = Genome::compatibility_distance(
                    &population[a],
                    &sp.representative,
                    cfg.c1,
                    cfg.c2,
                    cfg.c3,
                );
                let db = Genome::compatibility_distance(
                    &population[b],
                    &sp.representative,
                    cfg.c1,
                    cfg.c2,
                    cfg.c3,
                );
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("species retained non-empty");
        sp.representative = population[closest].clone();
    }
}

/// Update per-species stagnation counters from this generation's fitness.
fn update_species_stats<F: Scalar>(species: &mut [Species<F>], fitness: &[f64]) {
    for sp in species {
        let best = sp
            .members
            .iter()
            .map(|&i| fitness[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if best > sp.best_fitness_ever {
            sp.best_fitness_ever = best;
            sp.stagnation = 0;
        } else {
            sp.stagnation += 1;
        }
    }
}

/// Round real quotas to integers summing exactly to `total`: floor each,
/// then hand the leftovers to the largest fractional parts (ties to the
/// lowest index).
fn largest_remainder(quotas: &[f64], total: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(total.saturating_sub(assigned)) {
        sizes[j] += 1;
    }
    sizes
}

/// Offspring counts per species under explicit fitness sharing: quotas are
/// proportional to `members * mean_fitness` (the sharing identity
/// `N'_j = N_j * mean_j / mean`), rounded by largest remainder to sum to
/// `pop_size` exactly.
///
/// Species stagnant beyond `stagnation_limit` get zero unless they contain
/// the population champion. An all-zero quota vector (every fitness zero)
/// falls back to a uniform split over the non-stagnant species.
pub fn allocate_offspring<F: Scalar>(
    species: &[Species<F>],
    fitness: &[f64],
    pop_size: usize,
    stagnation_limit: u32,
    champion: usize,
) -> Vec<usize> {
    let eligible: Vec<bool> = species
        .iter()
        .map(|sp| sp.stagnation <= stagnation_limit || sp.members.contains(&champion))
        .collect();
    let shares: Vec<f64> = species
        .iter()
        .zip(&eligible)
        .map(|(sp, &ok)| {
            if ok {
                sp.members.iter().map(|&i| fitness[i]).sum::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = shares.iter().sum();
    let quotas: Vec<f64> = if total > 0.0 {
        shares.iter().map(|s| pop_size as f64 * s / total).collect()
    } else {
        let n = eligible.iter().filter(|&&ok| ok).count().max(1);
        eligible
            .iter()
            .map(|&ok| if ok { pop_size as f64 / n as f64 } else { 0.0 })
            .collect()
    };
    largest_remainder(&quotas, pop_size)
}

/// Build the next population: per species, the `elitism` fittest members
/// are copied unchanged and the remaining quota is filled with mutated
/// crossover children.
pub fn reproduce<F: Scalar, R: Rng + ?Sized>(
    population: &[Genome<F>],
    fitness: &[f64],
    species: &[Species<F>],
    sizes: &[usize],
    cfg: &EvolutionConfig,
    registry: &mut InnovationRegistry,
    rng: &mut R,
) -> Result<Vec<Genome<F>>> {
    registry.begin_generation();
    let mut next = Vec::with_capacity(cfg.pop_size);
    for (sp, &size) in species.iter().zip(sizes) {
        if size == 0 {
            continue;
        }
        // Fittest first; ties stay in population order.
        let mut ranked = sp.members.clone();
        ranked.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let n_elite = cfg.elitism.min(size).min(ranked.len());
        for &i in &ranked[..n_elite] {
            next.push(population[i].clone());
        }
        let pool_len =
            ((cfg.survival_fraction * ranked.len() as f64).ceil() as usize).clamp(1, ranked.len());
        for _ in n_elite..size {
            let (pa, pb) = match cfg.selection {
                Selection::Truncation => {
                    let a = rng.random_range(0..pool_len);
                    let b = if pool_len == 1 {
                        a
                    } else {
                        // Second draw over the pool minus the first parent.
                        let mut b = rng.random_range(0..pool_len - 1);
                        if b >= a {
                            b += 1;
                        }
                        b
                    };
                    (ranked[a], ranked[b])
                }
                Selection::Tournament { size: k } => {
                    let pick = |rng: &mut R| {
                        (0..k)
                            .map(|_| rng.random_range(0..ranked.len()))
                            .min()
                            .map(|rank| ranked[rank])
                            .expect("tournament size validated >= 1")
                    };
                    let a = pick(rng);
                    let b = pick(rng);
                    (a, b)
                }
            };
            let mut child = Genome::crossover(&population[pa], &population[pb], rng)?;
            child.mutate(&cfg.mutation, registry, rng);
            next.push(child);
        }
    }
    debug_assert_eq!(next.len(), cfg.pop_size);
    Ok(next)
}

/// One line of training history per generation.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub n_species: usize,
    /// Held-out score of the best champion so far; non-decreasing.
    pub champion_heldout: f64,
    pub param_count_champion: usize,
}

/// Result of a full run.
#[derive(Clone, Debug)]
pub struct Outcome<F: Scalar> {
    /// The genome with the best held-out score over the whole run.
    pub champion: Genome<F>,
    pub champion_heldout: f64,
    pub history: Vec<HistoryRow>,
    /// The population as of the last evaluated generation.
    pub population: Vec<Genome<F>>,
}

/// Run the full loop: evaluate, speciate, allocate, reproduce.
///
/// `initial` seeds the population (e.g. from a transplant); `None` starts
/// from fully connected random genomes. Each generation plays a fresh
/// shared puzzle set; its fittest genome is scored on a held-out set fixed
/// at generation 0, and the best held-out scorer ever is returned. No
/// reproduction happens after the final evaluation, so the returned
/// population is the one that was last scored.
pub fn evolve<F: Scalar>(
    cfg: &EvolutionConfig,
    master_seed: u64,
    initial: Option<Vec<Genome<F>>>,
) -> Result<Outcome<F>> {
    cfg.validate()?;
    let n_in = cfg.mode.n_inputs(cfg.d);
    let n_out = cfg.mode.n_actions();
    let mut population = match initial {
        Some(pop) => {
            if pop.len() != cfg.pop_size {
                return Err(Error::InvalidParameter(format!(
                    "initial population has {} genomes, config wants {}",
                    pop.len(),
                    cfg.pop_size
                )));
            }
            for g in &pop {
                if g.n_in() != n_in || g.n_out() != n_out {
                    return Err(Error::ArityModeMismatch {
                        n_in: g.n_in(),
                        n_out: g.n_out(),
                        mode: cfg.mode.name(),
                    });
                }
            }
            pop
        }
        None => {
            let mut rng = stream(master_seed, domain::INIT, 0, 0);
            (0..cfg.pop_size)
                .map(|_| Genome::new_initial(n_in, n_out, &mut rng))
                .collect()
        }
    };
    let mut registry = InnovationRegistry::for_population(&population);
    let max_steps = cfg.max_steps();

    let per = cfg.heldout_games / cfg.training_error_rates.len();
    let extra = cfg.heldout_games % cfg.training_error_rates.len();
    let heldout_schedule: Vec<(f64, usize)> = cfg
        .training_error_rates
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, per + usize::from(i < extra)))
        .collect();
    let heldout = generate_puzzle_set(
        cfg.d,
        cfg.mode,
        &heldout_schedule,
        &mut stream(master_seed, domain::HELDOUT, 0, 0),
    )?;

    let schedule: Vec<(f64, usize)> = cfg
        .training_error_rates
        .iter()
        .map(|&p| (p, cfg.games_per_rate))
        .collect();

    let mut species: Vec<Species<F>> = Vec::new();
    let mut next_species_id = 0;
    let mut best: Option<(Genome<F>, f64)> = None;
    let mut history = Vec::with_capacity(cfg.generations as usize);

    for generation in 0..cfg.generations {
        let puzzles = generate_puzzle_set(
            cfg.d,
            cfg.mode,
            &schedule,
            &mut stream(master_seed, domain::PUZZLES, generation as u64, 0),
        )?;
        let fitness: Vec<f64> = population
            .par_iter()
            .map(|g| evaluate_fitness(g, &puzzles, max_steps))
            .collect();
        for (g, &f) in population.iter_mut().zip(&fitness) {
            g.fitness = Some(f);
        }
        let champion = fitness
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.total_cmp(b).then(j.cmp(i)))
            .map(|(i, _)| i)
            .expect("pop_size >= 2");
        let heldout_score = win_rate(
            &population[champion],
            &heldout,
            GameMode::Evaluation,
            max_steps,
        );
        if best.as_ref().is_none_or(|(_, s)| heldout_score > *s) {
            best = Some((population[champion].clone(), heldout_score));
        }
        let (best_genome, best_score) = best.as_ref().expect("set above");

        speciate(&population, &mut species, &mut next_species_id, cfg);
        update_species_stats(&mut species, &fitness);
        history.push(HistoryRow {
            generation,
            best_fitness: fitness[champion],
            mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
            n_species: species.len(),
            champion_heldout: *best_score,
            param_count_champion: best_genome.param_count(),
        });

        if cfg
            .early_stop_heldout
            .is_some_and(|target| *best_score >= target)
        {
            break;
        }
        if generation + 1 < cfg.generations {
            let sizes = allocate_offspring(
                &species,
                &fitness,
                cfg.pop_size,
                cfg.stagnation_limit,
                champion,
            );
            population = reproduce(
                &population,
                &fitness,
                &species,
                &sizes,
                cfg,
                &mut registry,
                &mut stream(master_seed, domain::REPRODUCE, generation as u64, 0),
            )?;
        }
    }

    let (champion, champion_heldout) = best.expect("at least one generation ran");
    Ok(Outcome {
        champion,
        champion_heldout,
        history,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{ConnectionGene, NodeGene, NodeKind};
    use crate::toric::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A bitflip d=3 genome with no connections: every output is sigmoid(0),
    /// so ties make it always pick perspective 0, action 0.
    fn constant_net_genome() -> Genome<f64> {
        let nodes: Vec<NodeGene<f64>> = (0..9)
            .map(|id| NodeGene {
                id,
                kind: NodeKind::Input,
                bias: 0.0,
            })
            .chain((9..13).map(|id| NodeGene {
                id,
                kind: NodeKind::Output,
                bias: 0.0,
            }))
            .collect();
        Genome::from_parts(9, 4, nodes, vec![]).unwrap()
    }

    /// A hand-built perfect single-error decoder for bitflip d=3.
    ///
    /// With one X error, each perspective sees the partner defect at offset
    /// (+-1, 0) or (0, +-1) from the center; the edge between them is the
    /// error. Wire each partner position to the action for that edge:
    /// above -> h(0,0), below -> h(1,0), left -> v(0,0), right -> v(0,1).
    fn one_error_solver_genome() -> Genome<f64> {
        let nodes: Vec<NodeGene<f64>> = (0..9)
            .map(|id| NodeGene {
                id,
                kind: NodeKind::Input,
                bias: 0.0,
            })
            .chain((9..13).map(|id| NodeGene {
                id,
                kind: NodeKind::Output,
                bias: 0.0,
            }))
            .collect();
        let wire = |innovation, in_node, out_node| ConnectionGene {
            innovation,
            in_node,
            out_node,
            weight: 10.0,
            enabled: true,
        };
        let connections = vec![
            wire(0, 6, 9),  // partner above at (-1,0) = slot 6: correct h(0,0)
            wire(1, 3, 10), // partner below at (1,0) = slot 3: correct h(1,0)
            wire(2, 2, 11), // partner left at (0,-1) = slot 2: correct v(0,0)
            wire(3, 1, 12), // partner right at (0,1) = slot 1: correct v(0,1)
        ];
        Genome::from_parts(9, 4, nodes, connections).unwrap()
    }

    fn tiny_config() -> EvolutionConfig {
        EvolutionConfig {
            pop_size: 8,
            generations: 3,
            training_error_rates: vec![0.05, 0.10],
            games_per_rate: 4,
            heldout_games: 20,
            ..EvolutionConfig::new(NoiseKind::Bitflip, 3)
        }
    }

    #[test]
    fn error_free_puzzle_wins_immediately() {
        let net = compile(&constant_net_genome()).unwrap();
        let state = ToricState::new(3).unwrap();
        assert!(play_game(&net, state, NoiseKind::Bitflip, GameMode::Training, 36).unwrap());
    }

    #[test]
    fn single_error_first_defect_centered_wins_in_one_step() {
        // X on h(0,1) violates plaquettes (0,1) and (2,1); the row-major
        // first is (0,1), and the tie-break action is X on its h(0,0) edge,
        // which is exactly h(0,1): the inverse.
        let net = compile(&constant_net_genome()).unwrap();
        let mut state = ToricState::new(3).unwrap();
        state
            .apply_pauli(crate::toric::h_index(3, 0, 1), Pauli::X)
            .unwrap();
        assert!(play_game(&net, state, NoiseKind::Bitflip, GameMode::Training, 36).unwrap());
    }

    /// Trace oracle for the repeat rule. X on h(1,1) violates (1,1) and
    /// (0,1). The constant net always corrects the h(0,0) edge of the
    /// row-major-first defect, so the game walks: X h(0,1) (defects
    /// (1,1),(2,1)), X h(1,1) (defects (0,1),(2,1)), then selects X h(0,1)
    /// again. Training loses on that third selection; evaluation plays it
    /// and wins in 3 steps.
    #[test]
    fn constant_net_two_defect_trace() {
        let net = compile(&constant_net_genome()).unwrap();
        let make = || {
            let mut state = ToricState::new(3).unwrap();
            state
                .apply_pauli(crate::toric::h_index(3, 1, 1), Pauli::X)
                .unwrap();
            state
        };
        assert!(!play_game(&net, make(), NoiseKind::Bitflip, GameMode::Training, 36).unwrap());
        assert!(play_game(&net, make(), NoiseKind::Bitflip, GameMode::Evaluation, 36).unwrap());
        assert!(play_game(&net, make(), NoiseKind::Bitflip, GameMode::Evaluation, 3).unwrap());
        // One step short of the walk's length: step cap loses.
        assert!(!play_game(&net, make(), NoiseKind::Bitflip, GameMode::Evaluation, 2).unwrap());
    }

    #[test]
    fn one_error_solver_corrects_every_single_error() {
        let net = compile(&one_error_solver_genome()).unwrap();
        for qubit in 0..18 {
            let mut state = ToricState::new(3).unwrap();
            state.apply_pauli(qubit, Pauli::X).unwrap();
            assert!(
                play_game(&net, state, NoiseKind::Bitflip, GameMode::Training, 36).unwrap(),
                "failed on qubit {qubit}"
            );
        }
    }

    #[test]
    fn fitness_on_trivial_sets() {
        let clean = PuzzleSet {
            mode: NoiseKind::Bitflip,
            d: 3,
            puzzles: (0..5)
                .map(|_| Puzzle {
                    p: 0.0,
                    state: ToricState::new(3).unwrap(),
                })
                .collect(),
        };
        let g = constant_net_genome();
        assert_eq!(evaluate_fitness(&g, &clean, 36), 1.0);

        // The two-defect trace instance above is a guaranteed training loss
        // for the constant net.
        let mut state = ToricState::new(3).unwrap();
        state
            .apply_pauli(crate::toric::h_index(3, 1, 1), Pauli::X)
            .unwrap();
        let adversarial = PuzzleSet {
            mode: NoiseKind::Bitflip,
            d: 3,
            puzzles: (0..5)
                .map(|_| Puzzle {
                    p: 0.15,
                    state: state.clone(),
                })
                .collect(),
        };
        assert_eq!(evaluate_fitness(&g, &adversarial, 36), 0.0);
    }

    #[test]
    fn solver_fitness_at_least_single_error_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let set = generate_puzzle_set(3, NoiseKind::Bitflip, &[(0.01, 400)], &mut rng).unwrap();
        // apply_noise composes onto a clean frame, so the number of non-identity
        // frame entries is exactly the number of noise hits.
        let easy = set
            .puzzles
            .iter()
            .filter(|p| p.state.frame().iter().filter(|&&q| q != Pauli::I).count() <= 1)
            .count();
        let fitness = evaluate_fitness(&one_error_solver_genome(), &set, 36);
        assert!(
            fitness >= easy as f64 / 400.0,
            "fitness {fitness} below single-error fraction {}",
            easy as f64 / 400.0
        );
        // At p = 0.01 nearly all puzzles hold at most one error.
        assert!(easy >= 380);
    }

    #[test]
    fn puzzle_set_layout_and_rate_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let set =
            generate_puzzle_set(3, NoiseKind::Bitflip, &[(0.01, 3), (0.15, 2)], &mut rng).unwrap();
        assert_eq!(set.puzzles.len(), 5);
        assert_eq!(set.puzzles[0].p, 0.01);
        assert_eq!(set.puzzles[4].p, 0.15);
        assert!(generate_puzzle_set(3, NoiseKind::Bitflip, &[(1.5, 1)], &mut rng).is_err());
    }

    fn uniform_population(n: usize, seed: u64) -> Vec<Genome<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Genome::new_initial(9, 4, &mut rng);
        vec![base; n]
    }

    #[test]
    fn speciation_examples() {
        let cfg = EvolutionConfig::new(NoiseKind::Bitflip, 3);
        // Homogeneous population: one species.
        let pop = uniform_population(6, 1);
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop, &mut species, &mut next_id, &cfg);
        assert_eq!(species.len(), 1);
        assert_eq!(species[0].members, vec![0, 1, 2, 3, 4, 5]);

        // Two clusters far apart in weight space: two species.
        let conns: Vec<_> = pop[0]
            .connections()
            .iter()
            .map(|c| ConnectionGene {
                weight: c.weight + 20.0,
                ..*c
            })
            .collect();
        let far = Genome::from_parts(9, 4, pop[0].nodes().to_vec(), conns).unwrap();
        let pop2: Vec<_> = pop[..3].iter().cloned().chain(vec![far; 3]).collect();
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop2, &mut species, &mut next_id, &cfg);
        assert_eq!(species.len(), 2);
        assert_eq!(species[0].members, vec![0, 1, 2]);
        assert_eq!(species[1].members, vec![3, 4, 5]);

        // delta_c = 0: every distinct genome founds its own species.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let distinct: Vec<Genome<f64>> = (0..5)
            .map(|_| Genome::new_initial(9, 4, &mut rng))
            .collect();
        let zero = EvolutionConfig {
            delta_c: 0.0,
            ..cfg
        };
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&distinct, &mut species, &mut next_id, &zero);
        assert_eq!(species.len(), 5);
    }

    #[test]
    fn representatives_persist_and_track_members() {
        let cfg = EvolutionConfig::new(NoiseKind::Bitflip, 3);
        let pop = uniform_population(4, 3);
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop, &mut species, &mut next_id, &cfg);
        let id0 = species[0].id;
        // Re-speciating a compatible population keeps the species id.
        speciate(&pop, &mut species, &mut next_id, &cfg);
        assert_eq!(species.len(), 1);
        assert_eq!(species[0].id, id0);
        // An incompatible population retires it and founds a new one.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let far: Vec<Genome<f64>> = {
            let base = Genome::new_initial(9, 4, &mut rng);
            let conns: Vec<_> = base
                .connections()
                .iter()
                .map(|c| ConnectionGene {
                    weight: c.weight + 50.0,
                    ..*c
                })
                .collect();
            vec![Genome::from_parts(9, 4, base.nodes().to_vec(), conns).unwrap(); 4]
        };
        speciate(&far, &mut species, &mut next_id, &cfg);
        assert_eq!(species.len(), 1);
        assert_ne!(species[0].id, id0);
    }

    fn synthetic_species(member_counts: &[usize]) -> (Vec<Species<f64>>, Vec<Genome<f64>>) {
        let pop = uniform_population(member_counts.iter().sum(), 11);
        let mut species = Vec::new();
        let mut start = 0;
        for (id, &n) in member_counts.iter().enumerate() {
            species.push(Species {
                id: id as u64,
                representative: pop[start].clone(),
                members: (start..start + n).collect(),
                best_fitness_ever: 0.0,
                stagnation: 0,
            });
            start += n;
        }
        (species, pop)
    }

    #[test]
    fn allocation_follows_fitness_sharing() {
        // Equal means: sizes unchanged.
        let (species, _) = synthetic_species(&[4, 2, 2]);
        let fitness = vec![0.5; 8];
        assert_eq!(
            allocate_offspring(&species, &fitness, 8, 15, 0),
            vec![4, 2, 2]
        );

        // One species at twice the mean, one at zero: 2:0 scaled.
        let (species, _) = synthetic_species(&[3, 3]);
        let fitness = vec![0.8, 0.8, 0.8, 0.0, 0.0, 0.0];
        assert_eq!(allocate_offspring(&species, &fitness, 6, 15, 0), vec![6, 0]);

        // Fractional quotas 3.4 / 3.3 / 3.3 for pop 10: largest remainder.
        let (species, _) = synthetic_species(&[1, 1, 1]);
        let fitness = vec![0.34, 0.33, 0.33];
        assert_eq!(
            allocate_offspring(&species, &fitness, 10, 15, 0),
            vec![4, 3, 3]
        );
    }

    #[test]
    fn allocation_zeroes_stagnant_species_except_champion() {
        let (mut species, _) = synthetic_species(&[2, 2]);
        species[1].stagnation = 16;
        let fitness = vec![0.5, 0.5, 0.9, 0.9];
        // Champion (index 2) sits in the stagnant species: exempt, and
        // sharing still favors it (quotas 1.43 / 2.57).
        assert_eq!(allocate_offspring(&species, &fitness, 4, 15, 2), vec![1, 3]);
        // Champion elsewhere: the stagnant species is starved out.
        let fitness = vec![0.9, 0.5, 0.5, 0.5];
        assert_eq!(allocate_offspring(&species, &fitness, 4, 15, 0), vec![4, 0]);
    }

    #[test]
    fn allocation_uniform_fallback_on_zero_fitness() {
        let (species, _) = synthetic_species(&[3, 1]);
        let fitness = vec![0.0; 4];
        assert_eq!(
            allocate_offspring(&species, &fitness, 10, 15, 0),
            vec![5, 5]
        );
    }

    #[test]
    fn largest_remainder_rounds_exactly() {
        assert_eq!(largest_remainder(&[3.4, 3.3, 3.3], 10), vec![4, 3, 3]);
        assert_eq!(largest_remainder(&[2.5, 2.5], 5), vec![3, 2]);
        assert_eq!(largest_remainder(&[0.0, 10.0], 10), vec![0, 10]);
    }

    #[test]
    fn reproduce_with_full_elitism_copies_population() {
        let cfg = EvolutionConfig {
            elitism: 8,
            ..tiny_config()
        };
        let pop = uniform_population(8, 21);
        let fitness = vec![0.5; 8];
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop, &mut species, &mut next_id, &cfg);
        let mut reg = InnovationRegistry::for_population(&pop);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = reproduce(&pop, &fitness, &species, &[8], &cfg, &mut reg, &mut rng).unwrap();
        assert_eq!(next, pop);
    }

    #[test]
    fn reproduce_single_member_species_self_crosses() {
        // One member, quota 3, mutation off: 1 elite + 2 self-crossover
        // children, all identical to the lone member.
        let cfg = EvolutionConfig {
            pop_size: 3,
            elitism: 1,
            mutation: MutationConfig {
                weight_mutation_rate: 0.0,
                weight_replace_prob: 0.0,
                bias_mutation_rate: 0.0,
                connection_structural_rate: 0.0,
                node_structural_rate: 0.0,
                toggle_rate: 0.0,
                ..MutationConfig::default()
            },
            ..tiny_config()
        };
        let pop = uniform_population(1, 31);
        let fitness = vec![0.7];
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop, &mut species, &mut next_id, &cfg);
        let mut reg = InnovationRegistry::for_population(&pop);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let next = reproduce(&pop, &fitness, &species, &[3], &cfg, &mut reg, &mut rng).unwrap();
        assert_eq!(next.len(), 3);
        assert!(next.iter().all(|g| *g == pop[0]));
    }

    #[test]
    fn reproduce_is_deterministic() {
        let cfg = tiny_config();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let pop: Vec<Genome<f64>> = (0..8)
            .map(|_| Genome::new_initial(9, 4, &mut rng))
            .collect();
        let fitness: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
        let mut species = Vec::new();
        let mut next_id = 0;
        speciate(&pop, &mut species, &mut next_id, &cfg);
        let sizes = allocate_offspring(&species, &fitness, 8, cfg.stagnation_limit, 7);
        let run = || {
            let mut reg = InnovationRegistry::for_population(&pop);
            let mut rng = ChaCha8Rng::seed_from_u64(123);
            reproduce(&pop, &fitness, &species, &sizes, &cfg, &mut reg, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn evolve_single_generation_keeps_population() {
        let cfg = EvolutionConfig {
            generations: 1,
            ..tiny_config()
        };
        let pop = uniform_population(8, 41);
        let out = evolve(&cfg, 9, Some(pop.clone())).unwrap();
        assert_eq!(out.history.len(), 1);
        // Only a fitness pass ran: genomes unchanged apart from recorded
        // fitness.
        assert_eq!(out.population.len(), pop.len());
        for (a, b) in out.population.iter().zip(&pop) {
            assert_eq!(a.nodes(), b.nodes());
            assert_eq!(a.connections(), b.connections());
            assert!(a.fitness.is_some());
        }
    }

    #[test]
    fn evolve_invariants_hold() {
        let cfg = tiny_config();
        let out = evolve::<f64>(&cfg, 33, None).unwrap();
        assert_eq!(out.history.len(), 3);
        assert_eq!(out.population.len(), cfg.pop_size);
        for w in out.history.windows(2) {
            assert!(w[1].champion_heldout >= w[0].champion_heldout);
            assert_eq!(w[1].generation, w[0].generation + 1);
        }
        let last = out.history.last().unwrap();
        assert_eq!(last.champion_heldout, out.champion_heldout);
        assert_eq!(last.param_count_champion, out.champion.param_count());
        assert!(out.history.iter().all(|r| r.mean_fitness <= r.best_fitness));
        assert!(out.history.iter().all(|r| r.n_species >= 1));
        out.champion.validate().unwrap();
    }

    #[test]
    fn evolve_is_deterministic_per_seed() {
        let cfg = tiny_config();
        let a = evolve::<f64>(&cfg, 5, None).unwrap();
        let b = evolve::<f64>(&cfg, 5, None).unwrap();
        assert_eq!(a.champion, b.champion);
        assert_eq!(a.history, b.history);
        assert_eq!(a.population, b.population);
        let c = evolve::<f64>(&cfg, 6, None).unwrap();
        assert!(c.history != a.history || c.champion != a.champion);
    }

    #[test]
    fn evolve_early_stop_truncates_history() {
        // Any champion reaches held-out score 0 immediately.
        let cfg = EvolutionConfig {
            early_stop_heldout: Some(0.0),
            ..tiny_config()
        };
        let out = evolve::<f64>(&cfg, 12, None).unwrap();
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let ok = tiny_config();
        assert!(ok.validate().is_ok());
        let bad = EvolutionConfig {
            pop_size: 1,
            ..tiny_config()
        };
        assert!(bad.validate().is_err());
        let bad = EvolutionConfig {
            training_error_rates: vec![0.01, 1.2],
            ..tiny_config()
        };
        assert!(bad.validate().is_err());
        let bad = EvolutionConfig {
            mutation: MutationConfig {
                toggle_rate: -0.1,
                ..MutationConfig::default()
            },
            ..tiny_config()
        };
        assert!(bad.validate().is_err());
        let bad = EvolutionConfig {
            selection: Selection::Tournament { size: 0 },
            ..tiny_config()
        };
        assert!(bad.validate().is_err());
        let bad = EvolutionConfig {
            survival_fraction: 1.5,
            ..tiny_config()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn evolve_rejects_mismatched_initial_population() {
        let cfg = tiny_config();
        assert!(evolve(&cfg, 1, Some(uniform_population(5, 1))).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let wrong_arity: Vec<Genome<f64>> = (0..8)
            .map(|_| Genome::new_initial(25, 4, &mut rng))
            .collect();
        assert!(evolve(&cfg, 1, Some(wrong_arity)).is_err());
    }
}
