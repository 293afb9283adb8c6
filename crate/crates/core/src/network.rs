//! Compilation of genomes into evaluable feed-forward networks.
//!
//! A [`Phenotype`] is a topologically ordered list of node evaluations over
//! the enabled connections. Everything about it is deterministic: nodes
//! become ready in ascending id order and incoming edges are summed in
//! innovation order, so equal genomes produce bit-identical activations on
//! every platform and thread count.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::Error;
use crate::genome::{Genome, NodeKind};
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Debug)]
struct Step<F> {
    slot: usize,
    bias: F,
    incoming: Vec<(usize, F)>,
}

/// Compiled feed-forward network with sigmoid activations on every
/// non-input node.
#[derive(Clone, Debug)]
pub struct Phenotype<F: Scalar> {
    n_in: usize,
    n_out: usize,
    slope: F,
    n_slots: usize,
    steps: Vec<Step<F>>,
    output_slots: Vec<usize>,
}

/// Compile with the default activation slope of 1.
pub fn compile<F: Scalar>(genome: &Genome<F>) -> Result<Phenotype<F>> {
    compile_with_slope(genome, F::one())
}

/// Compile with an explicit slope: activations are `1 / (1 + e^(-slope x))`.
pub fn compile_with_slope<F: Scalar>(genome: &Genome<F>, slope: F) -> Result<Phenotype<F>> {
    let nodes = genome.nodes();
    let io = genome.n_in() + genome.n_out();
    // The canonical layout puts input slots at positions 0..n_in; activate
    // relies on that for the input copy.
    for (i, n) in nodes.iter().take(io).enumerate() {
        if n.id as usize != i {
            return Err(Error::MalformedGenome(format!(
                "canonical node {} is missing (found id {})",
                i, n.id
            )));
        }
    }
    if nodes.len() < io {
        return Err(Error::MalformedGenome(format!(
            "genome has {} nodes but needs {} inputs and outputs",
            nodes.len(),
            io
        )));
    }

    let index: HashMap<u32, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut incoming: Vec<Vec<(usize, F)>> = vec![Vec::new(); nodes.len()];
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut indegree = vec![0usize; nodes.len()];
    for c in genome.connections().iter().filter(|c| c.enabled) {
        let (i, o) = match (index.get(&c.in_node), index.get(&c.out_node)) {
            (Some(&i), Some(&o)) => (i, o),
            _ => {
                return Err(Error::MalformedGenome(format!(
                    "connection {} references a missing node",
                    c.innovation
                )))
            }
        };
        incoming[o].push((i, c.weight));
        out_edges[i].push(o);
        indegree[o] += 1;
    }

    let mut ready: BinaryHeap<Reverse<(u32, usize)>> = nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| indegree[i] == 0)
        .map(|(i, n)| Reverse((n.id, i)))
        .collect();
    let mut steps = Vec::with_capacity(nodes.len() - genome.n_in());
    let mut processed = 0usize;
    while let Some(Reverse((_, pos))) = ready.pop() {
        processed += 1;
        if nodes[pos].kind != NodeKind::Input {
            steps.push(Step {
                slot: pos,
                bias: nodes[pos].bias,
                incoming: std::mem::take(&mut incoming[pos]),
            });
        }
        for &o in &out_edges[pos] {
            indegree[o] -= 1;
            if indegree[o] == 0 {
                ready.push(Reverse((nodes[o].id, o)));
            }
        }
    }
    if processed < nodes.len() {
        let witness = genome
            .connections()
            .iter()
            .find(|c| {
                c.enabled && indegree[index[&c.out_node]] > 0 && {
                    let i = index[&c.in_node];
                    out_edges[i].iter().any(|&o| indegree[o] > 0)
                }
            })
            .expect("unprocessed nodes sit on an enabled cycle");
        return Err(Error::CycleDetected {
            in_node: witness.in_node,
            out_node: witness.out_node,
        });
    }

    let output_slots = (genome.n_in()..io).map(|id| index[&(id as u32)]).collect();
    Ok(Phenotype {
        n_in: genome.n_in(),
        n_out: genome.n_out(),
        slope,
        n_slots: nodes.len(),
        steps,
        output_slots,
    })
}

impl<F: Scalar> Phenotype<F> {
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// One forward pass; returns the output activations in slot order.
    pub fn activate(&self, input: &[F]) -> Result<Vec<F>> {
        if input.len() != self.n_in {
            return Err(Error::ArityMismatch {
                what: "inputs",
                expected: self.n_in,
                got: input.len(),
            });
        }
        let mut values = vec![F::zero(); self.n_slots];
        values[..self.n_in].copy_from_slice(input);
        for step in &self.steps {
            let mut sum = step.bias;
            for &(src, w) in &step.incoming {
                sum = sum + w * values[src];
            }
            values[step.slot] = sigmoid(self.slope * sum);
        }
        Ok(self.output_slots.iter().map(|&s| values[s]).collect())
    }
}

fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}
