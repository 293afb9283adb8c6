//! Growing a trained decoder onto a larger lattice.
//!
//! A decoder only ever sees syndromes through perspectives centered on a
//! defect, so each input slot really encodes an *offset from the center*,
//! not an absolute lattice position. Re-indexing every input of a
//! distance-d1 network by its signed offset and placing it at the same
//! offset on a distance-d2 grid therefore yields a d2 decoder that leaves
//! all hidden structure, weights, biases, and innovation numbers untouched.
//! Whenever the defects of a perspective all lie within the central
//! d1-window, the grown network reproduces the d1 network's outputs exactly
//! (bit for bit: the summation order is the innovation order, which is
//! preserved).
//!
//! Offsets only have a well-defined sign when the window has a center, so
//! both distances must be odd, and the target must be strictly larger.

use rand::Rng;

use crate::error::Error;
use crate::genome::{
    ConnectionGene, Genome, InnovationRegistry, MutationConfig, NodeGene, NodeKind,
};
use crate::perspective::NoiseKind;
use crate::scalar::Scalar;
use crate::Result;

/// Where input slot `slot` of a centered `d1` grid lands on a `d2` grid.
///
/// The slot's row and column are read as signed offsets in
/// `[-(d1-1)/2, (d1-1)/2]` and re-wrapped modulo `d2`. For depolarizing
/// inputs the plaquette and star blocks are remapped independently.
pub fn remap_input_slot(mode: NoiseKind, d1: usize, d2: usize, slot: usize) -> usize {
    debug_assert!(d1 % 2 == 1 && d2 % 2 == 1 && d2 > d1);
    debug_assert!(slot < mode.n_inputs(d1));
    let grid = |s: usize| {
        let half = (d1 - 1) / 2;
        let signed = |x: usize| x as isize - if x <= half { 0 } else { d1 as isize };
        let wrap = |s: isize| s.rem_euclid(d2 as isize) as usize;
        wrap(signed(s / d1)) * d2 + wrap(signed(s % d1))
    };
    match mode {
        NoiseKind::Bitflip => grid(slot),
        NoiseKind::Depolarizing if slot < d1 * d1 => grid(slot),
        NoiseKind::Depolarizing => d2 * d2 + grid(slot - d1 * d1),
    }
}

/// Embed a trained decoder into the input layout of a larger lattice.
///
/// Input genes move to their offset-preserving slots; hidden and output
/// genes, all weights and biases, and all innovation numbers are copied
/// unchanged (non-input node ids shift by the input-count difference to
/// keep the id layout canonical). The new input slots outside the original
/// window start with no connections; evolution has to discover them.
pub fn transplant<F: Scalar>(genome: &Genome<F>, mode: NoiseKind, d2: usize) -> Result<Genome<F>> {
    let d1 = mode
        .d_for_inputs(genome.n_in())
        .filter(|_| genome.n_out() == mode.n_actions())
        .ok_or(Error::ArityModeMismatch {
            n_in: genome.n_in(),
            n_out: genome.n_out(),
            mode: mode.name(),
        })?;
    if d1.is_multiple_of(2) || d2.is_multiple_of(2) || d2 <= d1 {
        return Err(Error::BadTransplant { d1, d2 });
    }
    let n_in1 = genome.n_in();
    let n_in2 = mode.n_inputs(d2);
    let delta = (n_in2 - n_in1) as u32;

    let mut nodes: Vec<NodeGene<F>> = (0..n_in2 as u32)
        .map(|id| NodeGene {
            id,
            kind: NodeKind::Input,
            bias: F::zero(),
        })
        .collect();
    nodes.extend(
        genome
            .nodes()
            .iter()
            .filter(|n| n.kind != NodeKind::Input)
            .map(|n| NodeGene {
                id: n.id + delta,
                kind: n.kind,
                bias: n.bias,
            }),
    );
    let connections = genome
        .connections()
        .iter()
        .map(|c| ConnectionGene {
            innovation: c.innovation,
            in_node: if (c.in_node as usize) < n_in1 {
                remap_input_slot(mode, d1, d2, c.in_node as usize) as u32
            } else {
                c.in_node + delta
            },
            out_node: c.out_node + delta,
            weight: c.weight,
            enabled: c.enabled,
        })
        .collect();
    Genome::from_parts(n_in2, genome.n_out(), nodes, connections)
}

/// Build a starting population around one (typically transplanted) genome.
///
/// The population is `pop_size` copies of `base`; the first is pristine,
/// every other copy goes once through mutation. A `fresh_fraction` of the
/// population (rounded down, never displacing the pristine copy) is
/// replaced by brand-new fully connected genomes at the tail. Fresh genomes
/// draw their markers from `registry` so that an innovation number still
/// identifies one pair of endpoints across the mixed population.
pub fn seed_population<F: Scalar, R: Rng + ?Sized>(
    base: &Genome<F>,
    pop_size: usize,
    fresh_fraction: f64,
    config: &MutationConfig,
    registry: &mut InnovationRegistry,
    rng: &mut R,
) -> Result<Vec<Genome<F>>> {
    if pop_size == 0 {
        return Err(Error::InvalidParameter(
            "pop_size must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&fresh_fraction) {
        return Err(Error::InvalidParameter(format!(
            "fresh_fraction must lie in [0, 1], got {fresh_fraction}"
        )));
    }
    let n_fresh = ((fresh_fraction * pop_size as f64).floor() as usize).min(pop_size - 1);
    let mut population = Vec::with_capacity(pop_size);
    population.push(base.clone());
    for _ in 1..pop_size - n_fresh {
        let mut g = base.clone();
        g.mutate(config, registry, rng);
        population.push(g);
    }
    for _ in 0..n_fresh {
        population.push(Genome::new_initial_with_registry(
            base.n_in(),
            base.n_out(),
            registry,
            rng,
        ));
    }
    Ok(population)
}
